use crate::error::{Error, Result};
use crate::spectral::{Grid, RealField};

use super::config::dispersion_coeff;

/// Amplitude and speed of the KdV soliton A sech^2(kappa (x1 - x0 - c t)) for
/// d_t n + V n d1 n + d1^3 n / (2V) = 0.
pub fn soliton_amplitude_speed(kappa: f64, v: f64) -> (f64, f64) {
    let alpha = dispersion_coeff(v);
    (12.0 * alpha * kappa * kappa / v, 4.0 * alpha * kappa * kappa)
}

/// Line soliton centred at x0 (nearest periodic image), constant in the other
/// directions. Returns the field and its speed.
pub fn kdv_line_soliton(kappa: f64, v: f64, grid: &Grid, x0: f64) -> Result<(RealField, f64)> {
    if !(kappa >= 0.0) || !(v > 0.0) {
        return Err(Error::config(format!(
            "soliton needs kappa >= 0 and V > 0 (got {kappa}, {v})"
        )));
    }
    if kappa == 0.0 {
        return Ok((RealField::zeros(grid), 0.0));
    }
    let (amp, speed) = soliton_amplitude_speed(kappa, v);
    let l = grid.lengths()[0];
    let tail = 4.0 * amp * (-kappa * l).exp();
    if tail > 1e-10 {
        return Err(Error::config(format!(
            "soliton tail {tail:.2e} at the period boundary exceeds 1e-10; enlarge the domain"
        )));
    }
    let f = RealField::from_fn(grid, |x| {
        let s = (x[0] - x0).rem_euclid(l);
        let s = if s >= 0.5 * l { s - l } else { s };
        amp / (kappa * s).cosh().powi(2)
    });
    Ok((f, speed))
}

/// Location of the maximum along x1, refined by a parabola through the peak cell.
pub fn peak_position(f: &RealField) -> f64 {
    let grid = f.grid();
    let n1 = grid.dims()[0];
    let stride = grid.len() / n1;
    let line: Vec<f64> = (0..n1).map(|i| f.values()[i * stride]).collect();
    let (imax, _) = line
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let ym = line[(imax + n1 - 1) % n1];
    let y0 = line[imax];
    let yp = line[(imax + 1) % n1];
    let denom = ym - 2.0 * y0 + yp;
    let shift = if denom.abs() > 0.0 { 0.5 * (ym - yp) / denom } else { 0.0 };
    let h = grid.spacing(0);
    ((imax as f64 + shift) * h).rem_euclid(grid.lengths()[0])
}
