use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The knobs of the rescaled systems: epsilon, ion temperature, wave speed, dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ScalingParams {
    epsilon: f64,
    ion_temperature: f64,
    wave_speed: f64,
    dim: usize,
    magnetic: bool,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    epsilon: f64,
    ion_temperature: f64,
    dim: usize,
}

impl TryFrom<RawParams> for ScalingParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        ScalingParams::new(r.epsilon, r.ion_temperature, r.dim)
    }
}

impl From<ScalingParams> for RawParams {
    fn from(p: ScalingParams) -> Self {
        RawParams {
            epsilon: p.epsilon,
            ion_temperature: p.ion_temperature,
            dim: p.dim,
        }
    }
}

/// V = sqrt(T_i + 1).
pub fn wave_speed(ion_temperature: f64) -> f64 {
    (ion_temperature + 1.0).sqrt()
}

impl ScalingParams {
    /// The magnetic flag follows the dimension: off in 2D, on in 3D.
    pub fn new(epsilon: f64, ion_temperature: f64, dim: usize) -> Result<ScalingParams> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::config(format!("epsilon {epsilon} must lie in (0,1)")));
        }
        if !(ion_temperature >= 0.0) || !ion_temperature.is_finite() {
            return Err(Error::config(format!(
                "ion temperature {ion_temperature} must be finite and nonnegative"
            )));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::config(format!("dimension {dim} must be 2 or 3")));
        }
        Ok(ScalingParams {
            epsilon,
            ion_temperature,
            wave_speed: wave_speed(ion_temperature),
            dim,
            magnetic: dim == 3,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn ion_temperature(&self) -> f64 {
        self.ion_temperature
    }

    pub fn wave_speed(&self) -> f64 {
        self.wave_speed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn magnetic(&self) -> bool {
        self.magnetic
    }

    /// b in the Lorentz term, 0 or 1.
    pub fn b(&self) -> f64 {
        if self.magnetic {
            1.0
        } else {
            0.0
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<ScalingParams> {
        ScalingParams::new(epsilon, self.ion_temperature, self.dim)
    }

    /// Weighted wavevector: (k1, sqrt(eps) k2) in 2D, k in 3D.
    pub fn kbar(&self, k: &[f64; 3]) -> [f64; 3] {
        if self.dim == 2 {
            [k[0], self.epsilon.sqrt() * k[1], 0.0]
        } else {
            *k
        }
    }

    pub fn kbar_sq(&self, k: &[f64; 3]) -> f64 {
        if self.dim == 2 {
            k[0] * k[0] + self.epsilon * k[1] * k[1]
        } else {
            k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
        }
    }
}
