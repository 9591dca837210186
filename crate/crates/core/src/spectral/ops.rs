use num_complex::Complex64;

use super::field::{RealField, SpectralField};
use super::grid::Grid;
use super::params::ScalingParams;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn forward_transform(f: &RealField) -> Result<SpectralField> {
    if let Some(i) = f.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "cannot transform non-finite value {} at index {i}",
            f.values()[i]
        )));
    }
    Ok(forward_unchecked(f))
}

pub(crate) fn forward_unchecked(f: &RealField) -> SpectralField {
    let grid = f.grid();
    let mut data: Vec<Complex64> = f
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    grid.fft_nd(&mut data, false);
    let scale = 1.0 / grid.len() as f64;
    data.iter_mut().for_each(|c| *c *= scale);
    SpectralField::new(grid, data).expect("length matches grid")
}

/// Returns the real part of the synthesized field.
pub fn inverse_transform(f: &SpectralField) -> RealField {
    let grid = f.grid();
    let mut data = f.coeffs().to_vec();
    grid.fft_nd(&mut data, true);
    RealField::from_vec_unchecked(grid, data.into_iter().map(|c| c.re).collect())
}

fn check_axis(grid: &Grid, axis: usize) -> Result<()> {
    if axis >= grid.rank() {
        return Err(Error::config(format!(
            "axis {axis} out of range for a rank-{} grid",
            grid.rank()
        )));
    }
    Ok(())
}

impl SpectralField {
    /// Multiplies by (i k_axis)^order; odd orders drop the Nyquist mode.
    pub fn differentiate(&mut self, axis: usize, order: u32) {
        let grid = self.grid().clone();
        let nyq = -(grid.dims()[axis] as i64) / 2;
        let stride: usize = grid.dims()[axis + 1..].iter().product();
        let n = grid.dims()[axis];
        let signed = grid.signed_indices(axis).to_vec();
        let ks = grid.wavenumbers(axis).to_vec();
        let factors: Vec<Complex64> = (0..n)
            .map(|m| {
                if order % 2 == 1 && signed[m] == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    (I * ks[m]).powu(order)
                }
            })
            .collect();
        for (flat, c) in self.coeffs_mut().iter_mut().enumerate() {
            *c *= factors[(flat / stride) % n];
        }
    }

    pub fn derivative(&self, axis: usize, order: u32) -> SpectralField {
        let mut out = self.clone();
        out.differentiate(axis, order);
        out
    }

    /// Zeroes modes outside the 2/3 band.
    pub fn dealias_in_place(&mut self) {
        let grid = self.grid().clone();
        for (flat, c) in self.coeffs_mut().iter_mut().enumerate() {
            if !grid.in_dealias_band(flat) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Zeroes modes that are Nyquist on any axis.
    pub fn drop_nyquist(&mut self) {
        let grid = self.grid().clone();
        for (flat, c) in self.coeffs_mut().iter_mut().enumerate() {
            if grid.is_nyquist(flat) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// L2 norm of the k1 = 0 hyperplane (continuum normalization).
    pub fn x1_mean_content(&self) -> f64 {
        let grid = self.grid();
        let s: f64 = self
            .coeffs()
            .iter()
            .zip(grid.kvecs())
            .filter(|(_, k)| k[0] == 0.0)
            .map(|(c, _)| c.norm_sqr())
            .sum();
        (s * grid.volume()).sqrt()
    }
}

pub fn spectral_derivative(f: &RealField, axis: usize, order: u32) -> Result<RealField> {
    check_axis(f.grid(), axis)?;
    if order == 0 {
        return Err(Error::config("derivative order must be at least 1"));
    }
    let mut s = forward_transform(f)?;
    s.differentiate(axis, order);
    Ok(inverse_transform(&s))
}

/// Unchecked derivative for internal use on known-good fields.
pub(crate) fn d(f: &RealField, axis: usize, order: u32) -> RealField {
    let mut s = forward_unchecked(f);
    s.differentiate(axis, order);
    inverse_transform(&s)
}

fn check_rank(f: &RealField, p: &ScalingParams) -> Result<()> {
    if f.grid().rank() != p.dim() {
        return Err(Error::config(format!(
            "grid rank {} does not match dimension {}",
            f.grid().rank(),
            p.dim()
        )));
    }
    Ok(())
}

/// (d1 f, sqrt(eps) d2 f) in 2D, grad f in 3D.
pub fn weighted_gradient(f: &RealField, p: &ScalingParams) -> Result<Vec<RealField>> {
    check_rank(f, p)?;
    let s = forward_transform(f)?;
    Ok((0..p.dim())
        .map(|a| {
            let mut g = s.derivative(a, 1);
            if p.dim() == 2 && a == 1 {
                let w = p.epsilon().sqrt();
                g.coeffs_mut().iter_mut().for_each(|c| *c *= w);
            }
            inverse_transform(&g)
        })
        .collect())
}

/// d1^2 f + eps d2^2 f in 2D, Laplacian in 3D.
pub fn weighted_laplacian(f: &RealField, p: &ScalingParams) -> Result<RealField> {
    check_rank(f, p)?;
    let mut s = forward_transform(f)?;
    let p = *p;
    s.apply_symbol(|k| Complex64::new(-p.kbar_sq(k), 0.0));
    Ok(inverse_transform(&s))
}

pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    out.dealias_in_place();
    out
}

/// Band-limits a real field with the 2/3 rule.
pub fn project(f: &RealField) -> RealField {
    let mut s = forward_unchecked(f);
    s.dealias_in_place();
    inverse_transform(&s)
}

/// 2/3-rule dealiased pointwise product.
pub fn dealiased_product(a: &RealField, b: &RealField) -> RealField {
    project(&(a * b))
}

/// Part of f constant along x1 (the k1 = 0 hyperplane).
pub fn x1_mean(f: &RealField) -> RealField {
    let mut s = forward_unchecked(f);
    s.apply_symbol(|k| {
        if k[0] == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    inverse_transform(&s)
}

/// g with d1 g = f and zero x1-mean; f must have no k1 = 0 content.
pub fn antiderivative_x1(f: &RealField) -> Result<RealField> {
    let s = forward_transform(f)?;
    let content = s.x1_mean_content();
    let tol = 1e-10 * f.l2();
    if content > tol {
        return Err(Error::Constraint {
            what: "x1-mean of the integrand is nonzero".into(),
            norm: content,
            tol,
        });
    }
    Ok(inverse_transform(&integrate_x1(s)))
}

/// Division by i k1 with k1 = 0 modes (and the x1-Nyquist mode) set to zero.
pub(crate) fn integrate_x1(mut s: SpectralField) -> SpectralField {
    let grid = s.grid().clone();
    let nyq = -(grid.dims()[0] as i64) / 2;
    for (flat, c) in s.coeffs_mut().iter_mut().enumerate() {
        let k1 = grid.kvecs()[flat][0];
        if k1 == 0.0 || grid.signed_mode(flat)[0] == nyq {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= I * k1;
        }
    }
    s
}

/// Unchecked x1-antiderivative of the x1-mean-free part of f.
pub(crate) fn d1_inv(f: &RealField) -> RealField {
    inverse_transform(&integrate_x1(forward_unchecked(f)))
}
