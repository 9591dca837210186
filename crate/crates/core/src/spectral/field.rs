use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Real samples on a grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

/// Fourier coefficients of a real field; zero mode equals the mean.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl RealField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<RealField> {
        if values.len() != grid.len() {
            return Err(Error::config(format!(
                "field has {} values but grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite field value {} at index {i}",
                values[i]
            )));
        }
        Ok(RealField {
            grid: grid.clone(),
            values,
        })
    }

    /// Skips the finiteness scan; for internal hot paths.
    pub(crate) fn from_vec_unchecked(grid: &Grid, values: Vec<f64>) -> RealField {
        debug_assert_eq!(values.len(), grid.len());
        RealField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Grid) -> RealField {
        RealField {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> RealField {
        RealField {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f` at every grid point (coordinates zero-padded to 3 axes).
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64; 3]) -> f64) -> RealField {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        RealField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> RealField {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        RealField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// self += a * x
    pub fn axpy(&mut self, a: f64, x: &RealField) {
        assert_eq!(self.grid, x.grid, "fields live on different grids");
        for (s, &v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Riemann sum, exact for band-limited periodic fields.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete L2 norm (sum of squares times cell volume, square-rooted).
    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl SpectralField {
    pub fn new(grid: &Grid, coeffs: Vec<Complex64>) -> Result<SpectralField> {
        if coeffs.len() != grid.len() {
            return Err(Error::config(format!(
                "spectrum has {} coefficients but grid has {} modes",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn zeros(grid: &Grid) -> SpectralField {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of a signed mode.
    pub fn mode(&self, m: &[i64]) -> Complex64 {
        self.coeffs[self.grid.mode_position(m)]
    }

    /// Multiplies every coefficient by `symbol(k)`.
    pub fn apply_symbol(&mut self, symbol: impl Fn(&[f64; 3]) -> Complex64) {
        for (c, k) in self.coeffs.iter_mut().zip(self.grid.kvecs()) {
            *c *= symbol(k);
        }
    }

    /// Largest deviation from Hermitian symmetry c(-k) = conj c(k).
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.coeffs.len() {
            let m = self.grid.signed_mode(i);
            let neg = [-m[0], -m[1], -m[2]];
            let j = self.grid.mode_position(&neg);
            worst = worst.max((self.coeffs[i] - self.coeffs[j].conj()).norm());
        }
        worst
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&RealField> for &RealField {
            type Output = RealField;
            fn $method(self, rhs: &RealField) -> RealField {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
        impl $tr<RealField> for RealField {
            type Output = RealField;
            fn $method(mut self, rhs: RealField) -> RealField {
                assert_eq!(self.grid, rhs.grid, "fields live on different grids");
                for (a, b) in self.values.iter_mut().zip(&rhs.values) {
                    *a = *a $op *b;
                }
                self
            }
        }
        impl $tr<&RealField> for RealField {
            type Output = RealField;
            fn $method(mut self, rhs: &RealField) -> RealField {
                assert_eq!(self.grid, rhs.grid, "fields live on different grids");
                for (a, b) in self.values.iter_mut().zip(&rhs.values) {
                    *a = *a $op *b;
                }
                self
            }
        }
        impl $tr<RealField> for &RealField {
            type Output = RealField;
            fn $method(self, rhs: RealField) -> RealField {
                self.zip_map(&rhs, |a, b| a $op b)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
// pointwise product, not dealiased
binop!(Mul, mul, *);

impl Mul<f64> for &RealField {
    type Output = RealField;
    fn mul(self, s: f64) -> RealField {
        self.map(|v| v * s)
    }
}

impl Mul<f64> for RealField {
    type Output = RealField;
    fn mul(mut self, s: f64) -> RealField {
        self.values.iter_mut().for_each(|v| *v *= s);
        self
    }
}

impl Mul<&RealField> for f64 {
    type Output = RealField;
    fn mul(self, f: &RealField) -> RealField {
        f * self
    }
}

impl Mul<RealField> for f64 {
    type Output = RealField;
    fn mul(self, f: RealField) -> RealField {
        f * self
    }
}

impl Neg for &RealField {
    type Output = RealField;
    fn neg(self) -> RealField {
        self.map(|v| -v)
    }
}

impl Neg for RealField {
    type Output = RealField;
    fn neg(self) -> RealField {
        self * -1.0
    }
}

impl AddAssign<&RealField> for RealField {
    fn add_assign(&mut self, rhs: &RealField) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&RealField> for RealField {
    fn sub_assign(&mut self, rhs: &RealField) {
        self.axpy(-1.0, rhs);
    }
}
