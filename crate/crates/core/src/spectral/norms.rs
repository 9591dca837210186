use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::field::{RealField, SpectralField};
use super::ops::forward_unchecked;
use super::params::ScalingParams;
use crate::error::{Error, Result};

/// Which weighted combination the triple norm uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormRole {
    Density,
    Velocity,
    Potential,
}

impl FromStr for NormRole {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(NormRole::Density),
            "velocity" => Ok(NormRole::Velocity),
            "potential" => Ok(NormRole::Potential),
            other => Err(Error::config(format!(
                "unknown norm role '{other}' (expected density, velocity or potential)"
            ))),
        }
    }
}

impl fmt::Display for NormRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NormRole::Density => "density",
            NormRole::Velocity => "velocity",
            NormRole::Potential => "potential",
        };
        f.write_str(s)
    }
}

fn weighted_sum(s: &SpectralField, weight: impl Fn(&[f64; 3]) -> f64) -> f64 {
    let sum: f64 = s
        .coeffs()
        .iter()
        .zip(s.grid().kvecs())
        .map(|(c, k)| weight(k) * c.norm_sqr())
        .sum();
    sum * s.grid().volume()
}

fn hs_weight(k: &[f64; 3], s: u32) -> f64 {
    (1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).powi(s as i32)
}

/// H^s norm with multiplier (1+|k|^2)^s; s = 0 is the continuum L2 norm.
pub fn sobolev_norm(f: &RealField, s: u32) -> f64 {
    sobolev_norm_spectral(&forward_unchecked(f), s)
}

pub fn sobolev_norm_spectral(f: &SpectralField, s: u32) -> f64 {
    weighted_sum(f, |k| hs_weight(k, s)).sqrt()
}

/// Energy of the modes outside the 2/3 band relative to the total, in H^s.
pub fn spectral_tail_fraction(f: &RealField, s: u32) -> f64 {
    let spec = forward_unchecked(f);
    let grid = spec.grid().clone();
    let mut total = 0.0;
    let mut tail = 0.0;
    for (flat, (c, k)) in spec.coeffs().iter().zip(grid.kvecs()).enumerate() {
        let e = hs_weight(k, s) * c.norm_sqr();
        total += e;
        if !grid.in_dealias_band(flat) {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (tail / total).sqrt()
    }
}

/// Weighted norm: density |f|^2, velocity adds eps|grad_bar f|^2, potential adds eps^2|lap_bar f|^2.
pub fn triple_norm(f: &RealField, role: NormRole, p: &ScalingParams, s: u32) -> Result<f64> {
    if f.grid().rank() != p.dim() {
        return Err(Error::config(format!(
            "grid rank {} does not match dimension {}",
            f.grid().rank(),
            p.dim()
        )));
    }
    let spec = forward_unchecked(f);
    let eps = p.epsilon();
    let p = *p;
    let total = weighted_sum(&spec, |k| {
        let kb = p.kbar_sq(k);
        let w = match role {
            NormRole::Density => 1.0,
            NormRole::Velocity => 1.0 + eps * kb,
            NormRole::Potential => 1.0 + eps * kb + eps * eps * kb * kb,
        };
        w * hs_weight(k, s)
    });
    Ok(total.sqrt())
}
