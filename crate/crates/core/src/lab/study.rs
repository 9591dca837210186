use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{initial_profile, StudyConfig};
use super::fit::{fit_order, OrderFit};
use super::remainder::{compute_remainder, remainder_norm_report};
use crate::error::{Error, Result};
use crate::euler_poisson::{run_ep_sampled, DiagnosticsLog};
use crate::limit::{
    solve_kp2, solve_linearized_kp, solve_linearized_zk, solve_zk, LimitConfig, LimitEquation, Trajectory,
};
use crate::profile::{
    assemble_initial_data, first_order_profiles_kp, first_order_profiles_zk, second_order_profiles_kp,
    second_order_profiles_zk, second_order_sources_kp, second_order_sources_zk, ProfileHierarchy,
};
use crate::spectral::io::{ensure_dir, write_json};
use crate::spectral::{sobolev_norm, Grid, RealField};

pub const CSV_HEADER: &str = "epsilon,time,norm_kind,n,u,phi,err1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub epsilon: f64,
    pub time: f64,
    pub norm_kind: String,
    pub n: f64,
    pub u: f64,
    pub phi: f64,
    /// ||n - 1 - eps n1||_{H^s'}
    pub err1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSummary {
    pub epsilon: f64,
    pub dt: f64,
    /// Largest L2 norm of the density and velocity remainders at t = 0.
    pub initial_remainder: f64,
    /// L2 distance between the Poisson potential and its profile expansion at t = 0.
    pub initial_phi_gap: f64,
    pub max_remainder: f64,
    pub max_err1: f64,
    pub warnings: Vec<String>,
    pub diagnostics: DiagnosticsLog,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub config: StudyConfig,
    pub norm_kind: String,
    /// Sorted by epsilon (descending), then time.
    pub rows: Vec<TableRow>,
    pub summaries: Vec<EpsilonSummary>,
    /// Fit of max-over-time err1 against epsilon.
    pub err1_fit: Option<OrderFit>,
    pub fit_note: Option<String>,
    /// max / min over epsilon of the max-over-time remainder norm.
    pub remainder_spread: Option<f64>,
    /// First sub-run failure; rows then hold only the runs that finished.
    pub failure: Option<String>,
}

impl ConvergenceTable {
    pub fn complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.epsilon, r.time, r.norm_kind, r.n, r.u, r.phi, r.err1
            )
            .expect("string write");
        }
        out
    }

    /// table.csv, table.json and diagnostics/eps_<k>.json.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        ensure_dir(dir)?;
        let csv = dir.join("table.csv");
        fs::write(&csv, self.to_csv()).map_err(|e| Error::io(&csv, e))?;
        write_json(dir.join("table.json"), self)?;
        let diag = dir.join("diagnostics");
        ensure_dir(&diag)?;
        for (k, s) in self.summaries.iter().enumerate() {
            write_json(diag.join(format!("eps_{k}.json")), s)?;
        }
        Ok(())
    }
}

struct Profiles {
    n1: Trajectory,
    n2: Option<Trajectory>,
}

fn limit_runs(cfg: &StudyConfig, n1_0: &RealField) -> Result<Profiles> {
    let v = cfg.wave_speed();
    let (dt, per) = cfg.limit_steps();
    let setup = |eq| {
        let mut c = LimitConfig::new(eq, v, dt, cfg.tau0);
        c.snapshot_every = per;
        c
    };
    let zero = RealField::zeros(n1_0.grid());
    if cfg.d == 2 {
        let n1 = solve_kp2(n1_0, &setup(LimitEquation::Kp2))?;
        let n2 = if cfg.truncation_order == 2 {
            let src = second_order_sources_kp(&n1, v)?;
            Some(solve_linearized_kp(&src, &zero, &setup(LimitEquation::LinKp))?)
        } else {
            None
        };
        Ok(Profiles { n1, n2 })
    } else {
        let n1 = solve_zk(n1_0, &setup(LimitEquation::Zk))?;
        let n2 = if cfg.truncation_order == 2 {
            let src = second_order_sources_zk(&n1, v)?;
            Some(solve_linearized_zk(&src, &zero, &setup(LimitEquation::LinZk))?)
        } else {
            None
        };
        Ok(Profiles { n1, n2 })
    }
}

impl Profiles {
    fn at(&self, t: f64, v: f64) -> Result<ProfileHierarchy> {
        let n1 = self.n1.at(t)?;
        let dim = n1.grid().rank();
        let mut h = match (&self.n2, dim) {
            (None, 2) => first_order_profiles_kp(&n1, v)?,
            (None, _) => first_order_profiles_zk(&n1, v)?,
            (Some(n2), 2) => second_order_profiles_kp(&n1, &n2.at(t)?, v)?,
            (Some(n2), _) => second_order_profiles_zk(&n1, &n2.at(t)?, v)?,
        };
        h.time = t;
        Ok(h)
    }
}

struct EpsilonRun {
    rows: Vec<TableRow>,
    summary: EpsilonSummary,
}

fn run_epsilon(cfg: &StudyConfig, grid: &Grid, profiles: &Profiles, eps: f64) -> Result<EpsilonRun> {
    let p = cfg.params(eps)?;
    let v = cfg.wave_speed();
    let s = cfg.s_prime;
    let norm_kind = norm_kind(cfg);
    let h0 = profiles.at(0.0, v)?;
    let state0 = assemble_initial_data(&h0, &p)?;
    let initial_phi_gap = (&state0.phi - &h0.profile_potential(eps)?).l2();
    let stepper = cfg.stepper.stepper(grid, &p);
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut initial_remainder = 0.0;
    let times = cfg.sample_times();
    let (_, log) = run_ep_sampled(&state0, &times, &stepper, |state| {
        let h = if state.time == 0.0 { h0.clone() } else { profiles.at(state.time, v)? };
        let r = compute_remainder(state, &h, &p)?;
        if state.time == 0.0 {
            initial_remainder = r.u_r.iter().map(|u| u.l2()).fold(r.n_r.l2(), f64::max);
        }
        let rep = remainder_norm_report(&r, cfg)?;
        if let Some(w) = rep.warning.as_ref() {
            warnings.push(format!("t = {:.4}: {w}", state.time));
        }
        let sel = rep.selected();
        let defect = state.n.zip_map(&h.n1, |n, a| n - 1.0 - eps * a);
        rows.push(TableRow {
            epsilon: eps,
            time: state.time,
            norm_kind: norm_kind.clone(),
            n: sel.n,
            u: sel.u,
            phi: sel.phi,
            err1: sobolev_norm(&defect, s),
        });
        Ok(())
    })?;
    let max_remainder = rows
        .iter()
        .map(|r| (r.n * r.n + r.u * r.u + r.phi * r.phi).sqrt())
        .fold(0.0, f64::max);
    let max_err1 = rows.iter().map(|r| r.err1).fold(0.0, f64::max);
    log::info!(
        "eps = {eps}: {} steps, max err1 {max_err1:.4e}, max remainder {max_remainder:.4e}",
        log.steps
    );
    Ok(EpsilonRun {
        rows,
        summary: EpsilonSummary {
            epsilon: eps,
            dt: stepper.dt,
            initial_remainder,
            initial_phi_gap,
            max_remainder,
            max_err1,
            warnings,
            diagnostics: log,
        },
    })
}

fn norm_kind(cfg: &StudyConfig) -> String {
    if cfg.uses_triple_norm() {
        format!("triple{}", cfg.s_prime)
    } else {
        format!("H{}", cfg.s_prime)
    }
}

/// Runs the epsilon sweep, one worker per epsilon on the current rayon pool.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let v = cfg.wave_speed();
    let n1_0 = initial_profile(&cfg.initial, &grid, v, cfg.seed)?;
    let profiles = limit_runs(cfg, &n1_0)?;
    let runs: Vec<Result<EpsilonRun>> = cfg
        .epsilons
        .par_iter()
        .map(|&eps| run_epsilon(cfg, &grid, &profiles, eps))
        .collect();

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut failure = None;
    for (eps, run) in cfg.epsilons.iter().zip(runs) {
        match run {
            Ok(r) => {
                rows.extend(r.rows);
                summaries.push(r.summary);
            }
            Err(e) => {
                log::error!("run at eps = {eps} failed: {e}");
                failure.get_or_insert(format!("eps = {eps}: {e}"));
            }
        }
    }

    let (err1_fit, fit_note) = if failure.is_some() {
        (None, Some("study incomplete; no fit".to_string()))
    } else {
        let pts: Vec<(f64, f64)> = summaries.iter().map(|s| (s.epsilon, s.max_err1)).collect();
        match fit_order(&pts) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let maxima: Vec<f64> = summaries.iter().map(|s| s.max_remainder).collect();
    let lo = maxima.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = maxima.iter().cloned().fold(0.0, f64::max);
    let remainder_spread = (failure.is_none() && lo > 0.0).then(|| hi / lo);

    Ok(ConvergenceTable {
        config: cfg.clone(),
        norm_kind: norm_kind(cfg),
        rows,
        summaries,
        err1_fit,
        fit_note,
        remainder_spread,
        failure,
    })
}
