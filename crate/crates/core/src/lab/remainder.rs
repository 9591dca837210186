use serde::{Deserialize, Serialize};

use super::config::StudyConfig;
use crate::error::{Error, Result};
use crate::euler_poisson::EPState;
use crate::profile::ProfileHierarchy;
use crate::spectral::{sobolev_norm, spectral_tail_fraction, triple_norm, NormRole, RealField, ScalingParams};

/// (state - truncated expansion) / eps^2.
#[derive(Clone, Debug, PartialEq)]
pub struct RemainderState {
    pub n_r: RealField,
    pub u_r: Vec<RealField>,
    pub phi_r: RealField,
    pub epsilon: f64,
    pub time: f64,
}

pub fn compute_remainder(full: &EPState, h: &ProfileHierarchy, p: &ScalingParams) -> Result<RemainderState> {
    if (full.time - h.time).abs() > 1e-9 * full.time.abs().max(1.0) {
        return Err(Error::config(format!(
            "state at t = {} but profiles at t = {}",
            full.time, h.time
        )));
    }
    if full.grid() != h.grid() {
        return Err(Error::config("state and profiles live on different grids"));
    }
    if h.dim != p.dim() || (h.v - p.wave_speed()).abs() > 1e-12 * p.wave_speed() {
        return Err(Error::config("profiles were built for other parameters"));
    }
    let eps = p.epsilon();
    let inv = 1.0 / (eps * eps);
    let (nt, ut, pt) = h.tilde(eps)?;
    let n_r = full.n.zip_map(&nt, |n, t| (n - 1.0 - eps * t) * inv);
    let u_r = full
        .u
        .iter()
        .zip(&ut)
        .map(|(u, t)| u.zip_map(t, |u, t| (u - eps * t) * inv))
        .collect();
    let phi_r = full.phi.zip_map(&pt, |f, t| (f - eps * t) * inv);
    Ok(RemainderState {
        n_r,
        u_r,
        phi_r,
        epsilon: eps,
        time: full.time,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentNorms {
    pub n: f64,
    pub u: f64,
    pub phi: f64,
    /// sqrt(n^2 + u^2 + phi^2).
    pub total: f64,
}

impl ComponentNorms {
    fn new(n: f64, u: f64, phi: f64) -> Self {
        ComponentNorms {
            n,
            u,
            phi,
            total: (n * n + u * u + phi * phi).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderNorms {
    pub epsilon: f64,
    pub time: f64,
    pub s: u32,
    pub sobolev: ComponentNorms,
    /// Present when T_i = 0.
    pub triple: Option<ComponentNorms>,
    pub warning: Option<String>,
}

impl RemainderNorms {
    /// The norms the study is judged by.
    pub fn selected(&self) -> &ComponentNorms {
        self.triple.as_ref().unwrap_or(&self.sobolev)
    }
}

const TAIL_LIMIT: f64 = 1e-6;
const NOISE_FLOOR: f64 = 1e-8;

pub fn remainder_norm_report(r: &RemainderState, cfg: &StudyConfig) -> Result<RemainderNorms> {
    let s = cfg.s_prime;
    let vec_norm = |fs: &[RealField], f: &dyn Fn(&RealField) -> Result<f64>| -> Result<f64> {
        let mut sum = 0.0;
        for u in fs {
            sum += f(u)?.powi(2);
        }
        Ok(sum.sqrt())
    };
    let hs = |f: &RealField| Ok(sobolev_norm(f, s));
    let sobolev = ComponentNorms::new(hs(&r.n_r)?, vec_norm(&r.u_r, &hs)?, hs(&r.phi_r)?);
    let triple = if cfg.uses_triple_norm() {
        let p = ScalingParams::new(r.epsilon, cfg.ion_temperature, cfg.d)?;
        let tn = |role| move |f: &RealField| triple_norm(f, role, &p, s);
        Some(ComponentNorms::new(
            tn(NormRole::Density)(&r.n_r)?,
            vec_norm(&r.u_r, &tn(NormRole::Velocity))?,
            tn(NormRole::Potential)(&r.phi_r)?,
        ))
    } else {
        None
    };
    let mut flagged = Vec::new();
    let named = [("n", &r.n_r), ("phi", &r.phi_r)]
        .into_iter()
        .chain(r.u_r.iter().map(|u| ("u", u)));
    for (name, f) in named {
        // roundoff-level fields (e.g. at t = 0) have a white spectrum
        if sobolev_norm(f, s) <= NOISE_FLOOR {
            continue;
        }
        let tail = spectral_tail_fraction(f, s);
        if tail > TAIL_LIMIT {
            flagged.push(format!("{name} ({tail:.1e})"));
        }
    }
    let warning = if flagged.is_empty() {
        None
    } else {
        Some(format!(
            "spectral tail above {TAIL_LIMIT:.0e} of the H^{s} norm in {}: refine the grid",
            flagged.join(", ")
        ))
    };
    if !sobolev.total.is_finite() || triple.is_some_and(|t| !t.total.is_finite()) {
        return Err(Error::Numerical(format!("remainder norm is not finite at t = {}", r.time)));
    }
    Ok(RemainderNorms {
        epsilon: r.epsilon,
        time: r.time,
        s,
        sobolev,
        triple,
        warning,
    })
}
