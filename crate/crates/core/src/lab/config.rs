use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler_poisson::StepperConfig;
use crate::limit::{kdv_line_soliton, LimitModel};
use crate::spectral::io::read_json;
use crate::spectral::{d, project, wave_speed, x1_mean, Grid, RealField, ScalingParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub lengths: Vec<f64>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(&self.dims, &self.lengths)
    }
}

/// EP stepping: dt = c_cfl * eps * min spacing at each epsilon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSpec {
    #[serde(default = "half")]
    pub c_cfl: f64,
    #[serde(default = "poisson_tol")]
    pub poisson_tol: f64,
    #[serde(default = "max_newton")]
    pub max_newton: usize,
    #[serde(default)]
    pub hyperviscosity: Option<f64>,
    #[serde(default)]
    pub auto_hyperviscosity: bool,
}

fn half() -> f64 {
    0.5
}
fn poisson_tol() -> f64 {
    StepperConfig::new(1.0).poisson_tol
}
fn max_newton() -> usize {
    StepperConfig::new(1.0).max_newton
}

impl Default for StepperSpec {
    fn default() -> Self {
        StepperSpec {
            c_cfl: half(),
            poisson_tol: poisson_tol(),
            max_newton: max_newton(),
            hyperviscosity: None,
            auto_hyperviscosity: false,
        }
    }
}

impl StepperSpec {
    pub fn stepper(&self, grid: &Grid, p: &ScalingParams) -> StepperConfig {
        let mut c = StepperConfig::new(self.c_cfl * p.epsilon() * grid.min_spacing());
        c.c_cfl = self.c_cfl;
        c.poisson_tol = self.poisson_tol;
        c.max_newton = self.max_newton;
        c.hyperviscosity = self.hyperviscosity;
        c.auto_hyperviscosity = self.auto_hyperviscosity;
        c
    }
}

/// Largest step of the limit solvers; the actual step divides the sampling interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSpec {
    #[serde(default = "limit_dt")]
    pub dt: f64,
}

fn limit_dt() -> f64 {
    0.01
}

impl Default for LimitSpec {
    fn default() -> Self {
        LimitSpec { dt: limit_dt() }
    }
}

/// Analytic families for n1 at t = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// d1^m exp(-|x - c|^2 / w^2), rescaled to max |n1| = amplitude. Each x1
    /// derivative buys one bounded x1-antiderivative, which the second-order
    /// profiles need in 2D.
    GaussianZeroMean {
        amplitude: f64,
        width: f64,
        /// Width along x2 (and x3); defaults to `width`.
        #[serde(default)]
        transverse_width: Option<f64>,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "three")]
        derivatives: u32,
        /// Multiplies the gaussian by cos(k0 (x1 - c1)) before differentiating,
        /// moving its spectrum away from k1 = 0.
        #[serde(default)]
        carrier: Option<f64>,
    },
    /// Random superposition of cosines with k1 != 0, rescaled to max |n1| = amplitude.
    ModePacket {
        amplitude: f64,
        modes: usize,
        max_mode: i64,
    },
    /// y-independent sech^2 soliton of the limit equation.
    KdvSoliton {
        kappa: f64,
        #[serde(default)]
        x0: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub schema_version: u32,
    pub d: usize,
    pub ion_temperature: f64,
    pub epsilons: Vec<f64>,
    pub tau0: f64,
    #[serde(default = "four")]
    pub s_prime: u32,
    #[serde(default = "one")]
    pub truncation_order: usize,
    /// Sampling intervals on [0, tau0]; norms are recorded at samples + 1 times.
    #[serde(default = "ten")]
    pub samples: usize,
    pub grid: GridSpec,
    #[serde(default)]
    pub stepper: StepperSpec,
    #[serde(default)]
    pub limit: LimitSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub seed: u64,
}

fn three() -> u32 {
    3
}
fn four() -> u32 {
    4
}
fn one() -> usize {
    1
}
fn ten() -> usize {
    10
}

impl StudyConfig {
    /// 2D, T_i = 1, 128^2 on [0,40]^2, five epsilons from 0.2 to 0.05, tau0 = 0.5.
    /// The data stays well inside the box so the periodic extension is smooth.
    pub fn default_2d() -> StudyConfig {
        StudyConfig {
            schema_version: SCHEMA_VERSION,
            d: 2,
            ion_temperature: 1.0,
            epsilons: vec![0.2, 0.141, 0.1, 0.071, 0.05],
            tau0: 0.5,
            s_prime: 4,
            truncation_order: 1,
            samples: 10,
            grid: GridSpec {
                dims: vec![128, 128],
                lengths: vec![40.0, 40.0],
            },
            stepper: StepperSpec::default(),
            limit: LimitSpec::default(),
            initial: InitialSpec::GaussianZeroMean {
                amplitude: 0.25,
                width: 4.0,
                transverse_width: None,
                center: None,
                derivatives: 2,
                carrier: None,
            },
            seed: 0,
        }
    }

    /// 3D, T_i = 0, 48^3 on [0,20]^3, epsilons 0.2, 0.1, 0.05, tau0 = 0.25.
    pub fn default_3d() -> StudyConfig {
        StudyConfig {
            d: 3,
            ion_temperature: 0.0,
            epsilons: vec![0.2, 0.1, 0.05],
            tau0: 0.25,
            grid: GridSpec {
                dims: vec![48, 48, 48],
                lengths: vec![20.0, 20.0, 20.0],
            },
            initial: InitialSpec::GaussianZeroMean {
                amplitude: 0.1,
                width: 2.5,
                transverse_width: None,
                center: None,
                derivatives: 2,
                carrier: None,
            },
            ..StudyConfig::default_2d()
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<StudyConfig> {
        let cfg: StudyConfig = read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn wave_speed(&self) -> f64 {
        wave_speed(self.ion_temperature)
    }

    pub fn params(&self, eps: f64) -> Result<ScalingParams> {
        ScalingParams::new(eps, self.ion_temperature, self.d)
    }

    /// Triple norms are reported for T_i = 0, plain H^s' otherwise.
    pub fn uses_triple_norm(&self) -> bool {
        self.ion_temperature == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.d != 2 && self.d != 3 {
            return Err(Error::config(format!("d = {} must be 2 or 3", self.d)));
        }
        if !(self.ion_temperature >= 0.0) || !self.ion_temperature.is_finite() {
            return Err(Error::config(format!("T_i = {} must be nonnegative", self.ion_temperature)));
        }
        if self.ion_temperature == 0.0 && self.d == 2 {
            return Err(Error::config("T_i = 0 is only covered in 3D"));
        }
        if self.epsilons.len() < 3 {
            return Err(Error::config("an order fit needs at least 3 epsilons"));
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0 && e <= 0.5)) {
            return Err(Error::config("epsilons must lie in (0, 0.5]"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("epsilons must be strictly descending"));
        }
        if !(self.tau0 > 0.0) || !self.tau0.is_finite() {
            return Err(Error::config(format!("tau0 = {} must be positive", self.tau0)));
        }
        if self.s_prime < 4 {
            return Err(Error::config(format!("s_prime = {} must be at least 4", self.s_prime)));
        }
        if self.truncation_order != 1 && self.truncation_order != 2 {
            return Err(Error::config("truncation_order must be 1 or 2"));
        }
        if self.samples < 10 {
            return Err(Error::config("at least 10 sampling intervals are required"));
        }
        let grid = self.grid.build()?;
        if grid.rank() != self.d {
            return Err(Error::config(format!("grid has rank {} but d = {}", grid.rank(), self.d)));
        }
        if !(self.stepper.c_cfl > 0.0) {
            return Err(Error::config("c_cfl must be positive"));
        }
        if !(self.limit.dt > 0.0) {
            return Err(Error::config("limit dt must be positive"));
        }
        match &self.initial {
            InitialSpec::GaussianZeroMean {
                width,
                transverse_width,
                center,
                derivatives,
                carrier,
                ..
            } => {
                if !(*width > 0.0) || transverse_width.is_some_and(|w| !(w > 0.0)) {
                    return Err(Error::config("gaussian width must be positive"));
                }
                if *derivatives == 0 && carrier.is_none_or(|k| k == 0.0) {
                    return Err(Error::config(
                        "a zero-mean gaussian needs an x1 derivative or a carrier",
                    ));
                }
                if center.as_ref().is_some_and(|c| c.len() != self.d) {
                    return Err(Error::config("gaussian center needs one entry per dimension"));
                }
            }
            InitialSpec::ModePacket { modes, max_mode, .. } => {
                if *modes == 0 || *max_mode < 1 {
                    return Err(Error::config("mode packet needs modes >= 1 and max_mode >= 1"));
                }
                let kmax = grid.dims().iter().map(|&n| (n / 3) as i64).min().unwrap_or(0);
                if *max_mode > kmax {
                    return Err(Error::config(format!(
                        "max_mode {max_mode} lies outside the dealiased band (|m| <= {kmax})"
                    )));
                }
            }
            InitialSpec::KdvSoliton { kappa, .. } => {
                if !(*kappa >= 0.0) {
                    return Err(Error::config("soliton kappa must be nonnegative"));
                }
            }
        }
        Ok(())
    }

    /// Time step of the limit solvers and how many of its steps make one sampling interval.
    pub fn limit_steps(&self) -> (f64, usize) {
        let interval = self.tau0 / self.samples as f64;
        let per = ((interval / self.limit.dt) - 1e-9).ceil().max(1.0) as usize;
        (interval / per as f64, per)
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.samples)
            .map(|j| self.tau0 * j as f64 / self.samples as f64)
            .collect()
    }
}

/// n1 at t = 0 on `grid`, band-limited and (in 2D) free of k1 = 0 content apart from its mean.
pub fn initial_profile(spec: &InitialSpec, grid: &Grid, v: f64, seed: u64) -> Result<RealField> {
    let dim = grid.rank();
    let f = match spec {
        InitialSpec::GaussianZeroMean {
            amplitude,
            width,
            transverse_width,
            center,
            derivatives,
            carrier,
        } => {
            let wt = transverse_width.unwrap_or(*width);
            let k0 = carrier.unwrap_or(0.0);
            let c: Vec<f64> = match center {
                Some(c) => c.clone(),
                None => grid.lengths().iter().map(|l| 0.5 * l).collect(),
            };
            let g = project(&RealField::from_fn(grid, |x| {
                let r2: f64 = (1..dim).map(|a| (x[a] - c[a]).powi(2)).sum();
                let s = x[0] - c[0];
                (k0 * s).cos() * (-s * s / (width * width) - r2 / (wt * wt)).exp()
            }));
            rescale(d(&g, 0, *derivatives), *amplitude)
        }
        InitialSpec::ModePacket {
            amplitude,
            modes,
            max_mode,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut terms = Vec::with_capacity(*modes);
            for _ in 0..*modes {
                let mut m = [0i64; 3];
                m[0] = rng.random_range(1..=*max_mode);
                for mj in m.iter_mut().take(dim).skip(1) {
                    *mj = rng.random_range(-*max_mode..=*max_mode);
                }
                let k: Vec<f64> = (0..dim)
                    .map(|a| 2.0 * PI * m[a] as f64 / grid.lengths()[a])
                    .collect();
                terms.push((k, rng.random::<f64>(), 2.0 * PI * rng.random::<f64>()));
            }
            let raw = RealField::from_fn(grid, |x| {
                terms
                    .iter()
                    .map(|(k, a, th)| a * ((0..dim).map(|j| k[j] * x[j]).sum::<f64>() + th).cos())
                    .sum()
            });
            rescale(raw, *amplitude)
        }
        InitialSpec::KdvSoliton { kappa, x0 } => {
            let x0 = x0.unwrap_or(0.5 * grid.lengths()[0]);
            kdv_line_soliton(*kappa, v, grid, x0)?.0
        }
    };
    let mut f = project(&f);
    if dim == 2 {
        let mean = f.mean();
        f -= &x1_mean(&f);
        f += &RealField::constant(grid, mean);
        LimitModel::kp(v).check_constraint(&f, "initial n1")?;
    }
    if !f.is_finite() {
        return Err(Error::Numerical("initial profile is not finite".into()));
    }
    Ok(f)
}

fn rescale(f: RealField, amplitude: f64) -> RealField {
    let peak = f.max_abs();
    if peak > 0.0 {
        f * (amplitude / peak)
    } else {
        f
    }
}
