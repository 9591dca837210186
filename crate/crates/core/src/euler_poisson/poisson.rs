use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{forward_unchecked, inverse_transform, RealField, ScalingParams};

pub const DEFAULT_POISSON_TOL: f64 = 1e-11;
pub const DEFAULT_MAX_NEWTON: usize = 25;
const MAX_CG: usize = 400;

/// Result of a Newton solve of eps*lap_bar(phi) = e^phi - n.
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub phi: RealField,
    pub iterations: usize,
    /// Relative residual before each Newton step and after the last one.
    pub residuals: Vec<f64>,
}

impl PoissonSolution {
    /// Largest ratio r_{j+1} / r_j^2 over steps that started below 1e-2
    /// and ended above roundoff.
    pub fn quadratic_constant(&self) -> Option<f64> {
        self.residuals
            .windows(2)
            .filter(|w| w[0] < 1e-2 && w[1] > 1e-14)
            .map(|w| w[1] / (w[0] * w[0]))
            .reduce(f64::max)
    }
}

fn apply_lap_bar(f: &RealField, p: &ScalingParams) -> RealField {
    let mut s = forward_unchecked(f);
    let p = *p;
    s.apply_symbol(|k| Complex64::new(-p.kbar_sq(k), 0.0));
    inverse_transform(&s)
}

/// eps*lap_bar(phi) - e^phi + n.
pub fn poisson_residual_field(n: &RealField, phi: &RealField, p: &ScalingParams) -> RealField {
    let mut r = apply_lap_bar(phi, p) * p.epsilon();
    for ((r, &ph), &nv) in r.values_mut().iter_mut().zip(phi.values()).zip(n.values()) {
        *r += nv - ph.exp();
    }
    r
}

/// ||eps*lap_bar(phi) - e^phi + n|| / ||n||.
pub fn poisson_residual(n: &RealField, phi: &RealField, p: &ScalingParams) -> f64 {
    poisson_residual_field(n, phi, p).l2() / n.l2()
}

fn dot(a: &RealField, b: &RealField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
}

/// Preconditioned CG for (-eps*lap_bar + diag(w)) x = r.
fn pcg(r: &RealField, w: &RealField, p: &ScalingParams, abs_tol: f64) -> Result<RealField> {
    let eps = p.epsilon();
    let wmean = w.mean();
    let p_copy = *p;
    let apply = |x: &RealField| -> RealField {
        let mut y = apply_lap_bar(x, p) * (-eps);
        for ((y, &xv), &wv) in y.values_mut().iter_mut().zip(x.values()).zip(w.values()) {
            *y += wv * xv;
        }
        y
    };
    let precond = |x: &RealField| -> RealField {
        let mut s = forward_unchecked(x);
        s.apply_symbol(|k| Complex64::new(1.0 / (eps * p_copy.kbar_sq(k) + wmean), 0.0));
        inverse_transform(&s)
    };
    let cell = r.grid().cell_volume();
    let norm = |v: &RealField| (dot(v, v) * cell).sqrt();

    let mut x = RealField::zeros(r.grid());
    let mut res = r.clone();
    if norm(&res) <= abs_tol {
        return Ok(x);
    }
    let mut z = precond(&res);
    let mut dir = z.clone();
    let mut rz = dot(&res, &z);
    for _ in 0..MAX_CG {
        let ad = apply(&dir);
        let alpha = rz / dot(&dir, &ad);
        x.axpy(alpha, &dir);
        res.axpy(-alpha, &ad);
        if norm(&res) <= abs_tol {
            return Ok(x);
        }
        z = precond(&res);
        let rz_new = dot(&res, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        dir = &z + &(beta * &dir);
    }
    // an inexact Newton direction is still usable; the outer loop decides
    Ok(x)
}

/// Newton solve with a spectrally preconditioned CG inner loop.
pub fn solve_poisson_detailed(
    n: &RealField,
    p: &ScalingParams,
    tol: f64,
    max_newton: usize,
    warm_start: Option<&RealField>,
) -> Result<PoissonSolution> {
    let min_n = n.min();
    if !(min_n > 0.0) {
        return Err(Error::Domain(format!(
            "Poisson solve needs a positive density, min n = {min_n}"
        )));
    }
    if n.grid().rank() != p.dim() {
        return Err(Error::config(format!(
            "grid rank {} does not match dimension {}",
            n.grid().rank(),
            p.dim()
        )));
    }
    let nnorm = n.l2();
    let mut phi = match warm_start {
        Some(w) => w.clone(),
        None => RealField::constant(n.grid(), n.mean().ln()),
    };
    let mut residuals = Vec::new();
    let mut iterations = 0;
    loop {
        let f = poisson_residual_field(n, &phi, p);
        let rel = f.l2() / nnorm;
        residuals.push(rel);
        if rel <= tol {
            return Ok(PoissonSolution {
                phi,
                iterations,
                residuals,
            });
        }
        if iterations >= max_newton || !rel.is_finite() {
            return Err(Error::Convergence {
                iterations,
                residual: rel,
            });
        }
        let w = phi.map(f64::exp);
        let inner = (rel.min(0.1) * rel).max(0.01 * tol) * nnorm;
        let delta = pcg(&f, &w, p, inner)?;
        phi += &delta;
        iterations += 1;
    }
}

pub fn solve_poisson(
    n: &RealField,
    p: &ScalingParams,
    tol: f64,
    warm_start: Option<&RealField>,
) -> Result<RealField> {
    Ok(solve_poisson_detailed(n, p, tol, DEFAULT_MAX_NEWTON, warm_start)?.phi)
}
