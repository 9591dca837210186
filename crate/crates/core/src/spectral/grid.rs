use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic Fourier grid with 1 to 3 axes.
///
/// Cheap to clone; plans and wavenumber tables are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dims: Vec<usize>,
    lengths: Vec<f64>,
    signed: Vec<Vec<i64>>,
    wavenumbers: Vec<Vec<f64>>,
    // per flat index, padded to three axes
    kflat: Vec<[f64; 3]>,
    band: Vec<bool>,
    nyquist: Vec<bool>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl Grid {
    pub fn new(dims: &[usize], lengths: &[f64]) -> Result<Grid> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::config(format!(
                "grid must have 1 to 3 axes, got {}",
                dims.len()
            )));
        }
        if dims.len() != lengths.len() {
            return Err(Error::config(format!(
                "dims has {} entries but lengths has {}",
                dims.len(),
                lengths.len()
            )));
        }
        for (&n, &l) in dims.iter().zip(lengths) {
            if n < 8 || n % 2 != 0 {
                return Err(Error::config(format!(
                    "axis size {n} must be even and at least 8"
                )));
            }
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::config(format!("axis length {l} must be positive")));
            }
        }

        let signed: Vec<Vec<i64>> = dims
            .iter()
            .map(|&n| {
                (0..n)
                    .map(|m| {
                        let m = m as i64;
                        let n = n as i64;
                        if m < n / 2 {
                            m
                        } else {
                            m - n
                        }
                    })
                    .collect()
            })
            .collect();
        let wavenumbers: Vec<Vec<f64>> = signed
            .iter()
            .zip(lengths)
            .map(|(s, &l)| {
                s.iter()
                    .map(|&m| 2.0 * std::f64::consts::PI * m as f64 / l)
                    .collect()
            })
            .collect();

        let total: usize = dims.iter().product();
        let mut kflat = Vec::with_capacity(total);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..total {
            let mut k = [0.0; 3];
            for (a, &i) in idx.iter().enumerate() {
                k[a] = wavenumbers[a][i];
            }
            kflat.push(k);
            for a in (0..dims.len()).rev() {
                idx[a] += 1;
                if idx[a] < dims[a] {
                    break;
                }
                idx[a] = 0;
            }
        }

        let mut band = Vec::with_capacity(total);
        let mut nyquist = Vec::with_capacity(total);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..total {
            let mut inside = true;
            let mut nyq = false;
            for (a, &i) in idx.iter().enumerate() {
                let m = signed[a][i];
                inside &= 3 * m.unsigned_abs() as usize <= dims[a];
                nyq |= m == -(dims[a] as i64) / 2;
            }
            band.push(inside);
            nyquist.push(nyq);
            for a in (0..dims.len()).rev() {
                idx[a] += 1;
                if idx[a] < dims[a] {
                    break;
                }
                idx[a] = 0;
            }
        }

        let mut planner = FftPlanner::new();
        let forward = dims.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect();

        Ok(Grid {
            inner: Arc::new(GridInner {
                dims: dims.to_vec(),
                lengths: lengths.to_vec(),
                signed,
                wavenumbers,
                kflat,
                band,
                nyquist,
                forward,
                inverse,
            }),
        })
    }

    pub fn rank(&self) -> usize {
        self.inner.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.inner.dims
    }

    pub fn lengths(&self) -> &[f64] {
        &self.inner.lengths
    }

    pub fn len(&self) -> usize {
        self.inner.kflat.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.inner.lengths[axis] / self.inner.dims[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.rank())
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Product of the periods.
    pub fn volume(&self) -> f64 {
        self.inner.lengths.iter().product()
    }

    /// Volume element of one sample.
    pub fn cell_volume(&self) -> f64 {
        (0..self.rank()).map(|a| self.spacing(a)).product()
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.inner.wavenumbers[axis]
    }

    pub fn signed_indices(&self, axis: usize) -> &[i64] {
        &self.inner.signed[axis]
    }

    /// Continuum wavevector of every flat mode index, zero-padded to 3 axes.
    pub fn kvecs(&self) -> &[[f64; 3]] {
        &self.inner.kflat
    }

    /// Multi-index of a flat (row-major) position.
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.rank()).rev() {
            idx[a] = flat % self.inner.dims[a];
            flat /= self.inner.dims[a];
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for a in 0..self.rank() {
            flat = flat * self.inner.dims[a] + idx[a];
        }
        flat
    }

    /// Signed mode indices of a flat position.
    pub fn signed_mode(&self, flat: usize) -> [i64; 3] {
        let idx = self.unflatten(flat);
        let mut m = [0i64; 3];
        for a in 0..self.rank() {
            m[a] = self.inner.signed[a][idx[a]];
        }
        m
    }

    /// Flat position of a signed mode (each entry in [-dim/2, dim/2)).
    pub fn mode_position(&self, mode: &[i64]) -> usize {
        let mut idx = [0usize; 3];
        for a in 0..self.rank() {
            let n = self.inner.dims[a] as i64;
            idx[a] = mode[a].rem_euclid(n) as usize;
        }
        self.flatten(&idx[..self.rank()])
    }

    /// Physical coordinate of every sample, zero-padded to 3 axes.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let mut x = [0.0; 3];
        for a in 0..self.rank() {
            x[a] = idx[a] as f64 * self.spacing(a);
        }
        x
    }

    /// True when the mode is the Nyquist mode on some axis.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        self.inner.nyquist[flat]
    }

    /// 2/3-rule mask: true when the mode survives dealiasing.
    pub fn in_dealias_band(&self, flat: usize) -> bool {
        self.inner.band[flat]
    }

    pub(crate) fn fft_plan(&self, axis: usize, inverse: bool) -> &Arc<dyn Fft<f64>> {
        if inverse {
            &self.inner.inverse[axis]
        } else {
            &self.inner.forward[axis]
        }
    }

    /// In-place n-dimensional FFT over a row-major buffer. Unnormalized.
    pub(crate) fn fft_nd(&self, data: &mut [Complex64], inverse: bool) {
        let dims = self.dims();
        let total = data.len();
        let mut lines: Vec<Complex64> = Vec::new();
        for axis in 0..dims.len() {
            let n = dims[axis];
            let plan = self.fft_plan(axis, inverse);
            let stride: usize = dims[axis + 1..].iter().product();
            if stride == 1 {
                plan.process(data);
                continue;
            }
            lines.resize(total, Complex64::new(0.0, 0.0));
            let outer = total / (n * stride);
            // gather strided lines into contiguous storage
            let mut p = 0;
            for o in 0..outer {
                let base = o * n * stride;
                for j in 0..stride {
                    for m in 0..n {
                        lines[p] = data[base + m * stride + j];
                        p += 1;
                    }
                }
            }
            plan.process(&mut lines);
            let mut p = 0;
            for o in 0..outer {
                let base = o * n * stride;
                for j in 0..stride {
                    for m in 0..n {
                        data[base + m * stride + j] = lines[p];
                        p += 1;
                    }
                }
            }
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dims == other.inner.dims && self.inner.lengths == other.inner.lengths)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dims", &self.inner.dims)
            .field("lengths", &self.inner.lengths)
            .finish()
    }
}
