use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitEquation {
    Kp2,
    Zk,
    LinKp,
    LinZk,
}

impl LimitEquation {
    pub fn is_linearized(self) -> bool {
        matches!(self, LimitEquation::LinKp | LimitEquation::LinZk)
    }

    /// KP-type equations carry the d1^{-1} constraint.
    pub fn is_kp(self) -> bool {
        matches!(self, LimitEquation::Kp2 | LimitEquation::LinKp)
    }
}

impl FromStr for LimitEquation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kp2" => Ok(LimitEquation::Kp2),
            "zk" => Ok(LimitEquation::Zk),
            "lin_kp" => Ok(LimitEquation::LinKp),
            "lin_zk" => Ok(LimitEquation::LinZk),
            other => Err(Error::config(format!("unknown limit equation '{other}'"))),
        }
    }
}

impl fmt::Display for LimitEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitEquation::Kp2 => "kp2",
            LimitEquation::Zk => "zk",
            LimitEquation::LinKp => "lin_kp",
            LimitEquation::LinZk => "lin_zk",
        })
    }
}

/// Dispersion coefficient 1/(2V) of d1^3.
pub fn dispersion_coeff(v: f64) -> f64 {
    1.0 / (2.0 * v)
}

/// ZK coefficient of d1 Lap_perp obtained from the 3D order-eps^2 elimination.
pub fn zk_transverse_coeff(v: f64) -> f64 {
    (1.0 + v.powi(4)) / (2.0 * v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitConfig {
    #[serde(rename = "V")]
    pub v: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub equation: LimitEquation,
    /// Coefficient of n d1 n; defaults to V.
    #[serde(default, alias = "zk_nonlinear_coeff")]
    pub nonlinear_coeff: Option<f64>,
    /// ZK coefficient of d1 Lap_perp; defaults to (1+V^4)/(2V).
    #[serde(default)]
    pub transverse_coeff: Option<f64>,
    /// Coefficient of d1(n1 nk) in the linearized equations; defaults to V.
    #[serde(default)]
    pub linear_background_coeff: Option<f64>,
    /// Keep every k-th step (the final time is always kept).
    #[serde(default = "one")]
    pub snapshot_every: usize,
}

fn one() -> usize {
    1
}

impl LimitConfig {
    pub fn new(equation: LimitEquation, v: f64, dt: f64, t_final: f64) -> LimitConfig {
        LimitConfig {
            v,
            dt,
            t_final,
            equation,
            nonlinear_coeff: None,
            transverse_coeff: None,
            linear_background_coeff: None,
            snapshot_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v > 0.0) || !self.v.is_finite() {
            return Err(Error::config(format!("V = {} must be positive", self.v)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::config(format!(
                "T = {} must be nonnegative",
                self.t_final
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::config("snapshot_every must be at least 1"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        dispersion_coeff(self.v)
    }

    pub fn beta(&self) -> f64 {
        self.transverse_coeff.unwrap_or_else(|| zk_transverse_coeff(self.v))
    }

    pub fn c_n(&self) -> f64 {
        self.nonlinear_coeff.unwrap_or(self.v)
    }

    pub fn c_bg(&self) -> f64 {
        self.linear_background_coeff.unwrap_or(self.v)
    }

    /// Number of uniform steps and their size.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.dt);
        }
        let n = ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}
