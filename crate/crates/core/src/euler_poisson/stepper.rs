use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poisson::{poisson_residual, solve_poisson_detailed};
use super::state::{nonlinear_part, EPState, StepperConfig, POSITIVITY_FLOOR};
use super::symbol::decompose_mode;
use crate::error::{Error, Result};
use crate::etd::{etdrk4_step, EtdCoefficients};
use crate::spectral::{
    inverse_transform, sobolev_norm, spectral_tail_fraction, Grid, RealField, ScalingParams,
    SpectralField,
};

/// Per-snapshot record of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub time: f64,
    pub mass: f64,
    pub min_n: f64,
    pub poisson_residual: f64,
    /// Sobolev norms of n - 1 keyed "H0", "H2", "H4".
    pub norms: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsLog {
    pub entries: Vec<Diagnostics>,
    pub steps: usize,
    pub hyperviscosity: Option<f64>,
}

pub fn diagnose(state: &EPState) -> Diagnostics {
    let nt = state.n.map(|v| v - 1.0);
    let mut norms = BTreeMap::new();
    for s in [0u32, 2, 4] {
        norms.insert(format!("H{s}"), sobolev_norm(&nt, s));
    }
    Diagnostics {
        time: state.time,
        mass: state.mass(),
        min_n: state.n.min(),
        poisson_residual: poisson_residual(&state.n, &state.phi, &state.params),
        norms,
    }
}

/// ETDRK4 integrator with exact per-mode propagation of the linearisation.
pub struct EpStepper {
    grid: Grid,
    params: ScalingParams,
    cfg: StepperConfig,
    comps: usize,
    t: Vec<Complex64>,
    t_inv: Vec<Complex64>,
    rates: Vec<Complex64>,
    coeffs: Option<EtdCoefficients>,
    nu: f64,
}

impl EpStepper {
    pub fn new(grid: &Grid, params: ScalingParams, cfg: &StepperConfig) -> Result<EpStepper> {
        cfg.validate(grid, &params)?;
        if grid.rank() != params.dim() {
            return Err(Error::config(format!(
                "grid rank {} does not match dimension {}",
                grid.rank(),
                params.dim()
            )));
        }
        let comps = params.dim() + 1;
        let m = grid.len();
        let mut t = Vec::with_capacity(m * comps * comps);
        let mut t_inv = Vec::with_capacity(m * comps * comps);
        let mut lambda = Vec::with_capacity(m * comps);
        for k in grid.kvecs() {
            let dec = decompose_mode(k, &params);
            t.extend_from_slice(&dec.t);
            t_inv.extend_from_slice(&dec.t_inv);
            lambda.extend(dec.lambda);
        }
        let mut s = EpStepper {
            grid: grid.clone(),
            params,
            cfg: cfg.clone(),
            comps,
            t,
            t_inv,
            rates: Vec::new(),
            coeffs: None,
            nu: 0.0,
        };
        s.set_rates(&lambda, cfg.hyperviscosity.unwrap_or(0.0));
        Ok(s)
    }

    fn set_rates(&mut self, lambda: &[f64], nu: f64) {
        let eps = self.params.epsilon();
        self.nu = nu;
        self.rates = lambda
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let k = &self.grid.kvecs()[i / self.comps];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                Complex64::new(-nu * k2 * k2, l / eps)
            })
            .collect();
        self.coeffs = None;
    }

    /// Turns on hyperviscosity with coefficient nu.
    pub fn set_hyperviscosity(&mut self, nu: f64) {
        let lambda: Vec<f64> = self.rates.iter().map(|r| r.im * self.params.epsilon()).collect();
        self.set_rates(&lambda, nu);
    }

    pub fn hyperviscosity(&self) -> f64 {
        self.nu
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    fn to_eigen(&self, w: &[Vec<Complex64>]) -> Vec<Complex64> {
        let c = self.comps;
        let mut z = vec![Complex64::new(0.0, 0.0); self.grid.len() * c];
        for m in 0..self.grid.len() {
            let ti = &self.t_inv[m * c * c..(m + 1) * c * c];
            for r in 0..c {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..c {
                    acc += ti[r * c + j] * w[j][m];
                }
                z[m * c + r] = acc;
            }
        }
        z
    }

    fn from_eigen(&self, z: &[Complex64]) -> Vec<Vec<Complex64>> {
        let c = self.comps;
        let mut w = vec![vec![Complex64::new(0.0, 0.0); self.grid.len()]; c];
        for m in 0..self.grid.len() {
            let tm = &self.t[m * c * c..(m + 1) * c * c];
            for r in 0..c {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..c {
                    acc += tm[r * c + j] * z[m * c + j];
                }
                w[r][m] = acc;
            }
        }
        w
    }

    fn density(&self, w0: &[Complex64]) -> RealField {
        let nt = inverse_transform(&SpectralField::new(&self.grid, w0.to_vec()).expect("sized"));
        nt.map(|v| 1.0 + v)
    }

    /// Advances by h (must respect the configured bound).
    pub fn step(&mut self, state: &EPState, h: f64) -> Result<EPState> {
        if h > self.cfg.dt_max(&self.grid, &self.params) * (1.0 + 1e-12) {
            return Err(Error::config(format!(
                "step {h} exceeds the stability bound"
            )));
        }
        let rebuild = match &self.coeffs {
            Some(c) => (c.h - h).abs() > 1e-14 * h,
            None => true,
        };
        if rebuild {
            self.coeffs = Some(EtdCoefficients::new(&self.rates, h));
        }
        let coeffs = self.coeffs.take().expect("just built");
        let result = self.step_with(&coeffs, state, h);
        self.coeffs = Some(coeffs);
        result
    }

    fn step_with(&self, coeffs: &EtdCoefficients, state: &EPState, h: f64) -> Result<EPState> {
        let p = self.params;
        let tol = self.cfg.poisson_tol;
        let max_newton = self.cfg.max_newton;
        let mut warm = state.phi.clone();
        let z0 = self.to_eigen(&state.to_spectral());
        let z1 = etdrk4_step(coeffs, &z0, state.time, |z, t| -> Result<Vec<Complex64>> {
            let w = self.from_eigen(z);
            let n = self.density(&w[0]);
            let min_n = n.min();
            if min_n <= POSITIVITY_FLOOR {
                return Err(Error::Positivity { min_n, time: t });
            }
            let sol = solve_poisson_detailed(&n, &p, tol, max_newton, Some(&warm))?;
            warm = sol.phi;
            let nl = nonlinear_part(&self.grid, &p, &w, &warm);
            Ok(self.to_eigen(&nl))
        })?;
        let w = self.from_eigen(&z1);
        let n = self.density(&w[0]);
        let time = state.time + h;
        let min_n = n.min();
        if min_n <= POSITIVITY_FLOOR {
            return Err(Error::Positivity { min_n, time });
        }
        let phi = solve_poisson_detailed(&n, &p, tol, max_newton, Some(&warm))?.phi;
        let u = w[1..]
            .iter()
            .map(|c| inverse_transform(&SpectralField::new(&self.grid, c.clone()).expect("sized")))
            .collect();
        let out = EPState {
            n,
            u,
            phi,
            time,
            params: p,
        };
        if !out.n.is_finite() || out.u.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical(format!("non-finite state at t = {time}")));
        }
        Ok(out)
    }
}

/// One ETDRK4 step of size cfg.dt.
pub fn step_ep(state: &EPState, cfg: &StepperConfig) -> Result<EPState> {
    let mut s = EpStepper::new(state.grid(), state.params, cfg)?;
    s.step(state, cfg.dt)
}

fn auto_nu(state: &EPState) -> Option<f64> {
    let nt = state.n.map(|v| v - 1.0);
    if spectral_tail_fraction(&nt, 0) <= 1e-8 {
        return None;
    }
    // damp the top octave of the dealiased band at rate one
    let grid = state.grid();
    let kmax = (0..grid.rank())
        .map(|a| 2.0 * std::f64::consts::PI * (grid.dims()[a] as f64 / 3.0) / grid.lengths()[a])
        .fold(f64::INFINITY, f64::min);
    Some((2.0 / kmax).powi(4))
}

/// Integrates through `times` (increasing, all >= the initial time), calling
/// `observe` at each. Steps are at most cfg.dt and land on every time exactly.
pub fn run_ep_sampled(
    initial: &EPState,
    times: &[f64],
    cfg: &StepperConfig,
    mut observe: impl FnMut(&EPState) -> Result<()>,
) -> Result<(EPState, DiagnosticsLog)> {
    let mut stepper = EpStepper::new(initial.grid(), initial.params, cfg)?;
    let mut log = DiagnosticsLog::default();
    if cfg.hyperviscosity.is_none() && cfg.auto_hyperviscosity {
        if let Some(nu) = auto_nu(initial) {
            log::info!("spectral tail above 1e-8, enabling hyperviscosity nu = {nu:.3e}");
            stepper.set_hyperviscosity(nu);
        }
    }
    if stepper.hyperviscosity() > 0.0 {
        log.hyperviscosity = Some(stepper.hyperviscosity());
    }
    let base = sobolev_norm(&initial.n.map(|v| v - 1.0), 2);
    let limit = 10.0 * base;
    let mut state = initial.clone();
    let mut first = true;
    for &target in times {
        if target < state.time - 1e-12 {
            return Err(Error::config(format!(
                "sample time {target} precedes the current time {}",
                state.time
            )));
        }
        let span = target - state.time;
        if span > 1e-14 * target.abs().max(1.0) {
            let steps = ((span / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for s in 0..steps {
                state = stepper.step(&state, h)?;
                if s + 1 == steps {
                    state.time = target;
                }
                log.steps += 1;
                let norm = sobolev_norm(&state.n.map(|v| v - 1.0), 2);
                if norm > limit && norm > 1e-12 {
                    return Err(Error::BlowUp {
                        time: state.time,
                        norm,
                        limit,
                    });
                }
            }
        } else if !first {
            continue;
        }
        first = false;
        log.entries.push(diagnose(&state));
        observe(&state)?;
    }
    Ok((state, log))
}

/// Integrates to time T, logging the initial and final snapshots.
pub fn run_ep(initial: &EPState, t_final: f64, cfg: &StepperConfig) -> Result<(EPState, DiagnosticsLog)> {
    if !(t_final >= 0.0) {
        return Err(Error::config(format!("final time {t_final} must be nonnegative")));
    }
    let t0 = initial.time;
    run_ep_sampled(initial, &[t0, t0 + t_final], cfg, |_| Ok(()))
}
