//! JSON run configurations for the single-run subcommands. Convergence
//! studies use `StudyConfig` from the core crate directly.

use std::path::Path;

use disperlim_core::lab::{GridSpec, InitialSpec, StepperSpec, SCHEMA_VERSION};
use disperlim_core::spectral::io::read_json;
use disperlim_core::{Error, Result, ScalingParams};
use serde::{Deserialize, Serialize};

fn check_common(schema_version: u32, d: usize, ti: f64, grid: &GridSpec) -> std::result::Result<(), String> {
    if schema_version != SCHEMA_VERSION {
        return Err(format!("schema_version {schema_version} is not supported (expected {SCHEMA_VERSION})"));
    }
    if d != 2 && d != 3 {
        return Err(format!("d = {d} must be 2 or 3"));
    }
    if !(ti >= 0.0) || !ti.is_finite() {
        return Err(format!("T_i = {ti} must be nonnegative"));
    }
    if grid.dims.len() != d {
        return Err(format!("grid has rank {} but d = {d}", grid.dims.len()));
    }
    Ok(())
}

fn invalid(msg: String) -> Error {
    Error::Config(msg)
}

/// Limit-equation runs (`kp`, `zk`, `lin-kp`, `lin-zk`) and hierarchies
/// (`profiles`, `residuals`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitRun {
    pub schema_version: u32,
    pub d: usize,
    pub ion_temperature: f64,
    pub t_final: f64,
    #[serde(default = "limit_dt")]
    pub dt: f64,
    #[serde(default = "ten")]
    pub snapshot_every: usize,
    /// Truncation order of the hierarchy built by `profiles`.
    #[serde(default = "one")]
    pub order: usize,
    pub grid: GridSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub nonlinear_coeff: Option<f64>,
    #[serde(default)]
    pub transverse_coeff: Option<f64>,
    #[serde(default)]
    pub linear_background_coeff: Option<f64>,
}

fn limit_dt() -> f64 {
    0.01
}
fn ten() -> usize {
    10
}
fn one() -> usize {
    1
}

impl LimitRun {
    pub fn from_file(path: &Path) -> Result<LimitRun> {
        let c: LimitRun = read_json(path)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.schema_version, self.d, self.ion_temperature, &self.grid).map_err(invalid)?;
        if !(self.t_final >= 0.0) || !(self.dt > 0.0) {
            return Err(invalid("t_final must be nonnegative and dt positive".into()));
        }
        if self.snapshot_every == 0 {
            return Err(invalid("snapshot_every must be at least 1".into()));
        }
        if self.order != 1 && self.order != 2 {
            return Err(invalid("order must be 1 or 2".into()));
        }
        Ok(())
    }

    pub fn wave_speed(&self) -> f64 {
        disperlim_core::spectral::wave_speed(self.ion_temperature)
    }
}

/// A single Euler-Poisson run from well-prepared data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpRun {
    pub schema_version: u32,
    pub d: usize,
    pub ion_temperature: f64,
    pub epsilon: f64,
    pub t_final: f64,
    #[serde(default = "ten")]
    pub samples: usize,
    /// Order of the expansion used for the initial data.
    #[serde(default = "one")]
    pub order: usize,
    pub grid: GridSpec,
    #[serde(default)]
    pub stepper: StepperSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub seed: u64,
}

impl EpRun {
    pub fn from_file(path: &Path) -> Result<EpRun> {
        let c: EpRun = read_json(path)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.schema_version, self.d, self.ion_temperature, &self.grid).map_err(invalid)?;
        ScalingParams::new(self.epsilon, self.ion_temperature, self.d)?;
        if !(self.t_final >= 0.0) || self.samples == 0 {
            return Err(invalid("t_final must be nonnegative and samples at least 1".into()));
        }
        if self.order != 1 && self.order != 2 {
            return Err(invalid("order must be 1 or 2".into()));
        }
        if !(self.stepper.c_cfl > 0.0) {
            return Err(invalid("c_cfl must be positive".into()));
        }
        Ok(())
    }
}

/// Line-soliton transport check of the KP-II solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonRun {
    #[serde(default = "kappa")]
    pub kappa: f64,
    #[serde(default = "one_f")]
    pub ion_temperature: f64,
    #[serde(default = "points")]
    pub points: usize,
    #[serde(default = "length")]
    pub length: f64,
    #[serde(default = "soliton_dt")]
    pub dt: f64,
    /// Number of full domain crossings.
    #[serde(default = "one_f")]
    pub crossings: f64,
}

fn kappa() -> f64 {
    0.5
}
fn one_f() -> f64 {
    1.0
}
fn points() -> usize {
    256
}
fn length() -> f64 {
    60.0
}
fn soliton_dt() -> f64 {
    0.01
}

impl Default for SolitonRun {
    fn default() -> Self {
        SolitonRun {
            kappa: kappa(),
            ion_temperature: one_f(),
            points: points(),
            length: length(),
            dt: soliton_dt(),
            crossings: one_f(),
        }
    }
}

impl SolitonRun {
    pub fn from_file(path: &Path) -> Result<SolitonRun> {
        let c: SolitonRun = read_json(path)?;
        if !(c.kappa > 0.0) || c.points < 8 || !(c.length > 0.0) || !(c.dt > 0.0) || !(c.crossings > 0.0) {
            return Err(invalid("soliton run needs kappa, length, dt, crossings > 0 and points >= 8".into()));
        }
        Ok(c)
    }
}
