use std::path::{Path, PathBuf};

use disperlim_core::euler_poisson::run_ep_sampled;
use disperlim_core::lab::{initial_profile, run_convergence_study, StudyConfig};
use disperlim_core::limit::{
    conserved_quantities, kdv_line_soliton, peak_position, solve_kp2, solve_linearized_kp, solve_linearized_zk,
    solve_zk, LimitConfig, LimitEquation, LimitModel, Trajectory,
};
use disperlim_core::profile::{
    assemble_initial_data, first_order_profiles_kp, first_order_profiles_zk, residual_order_systems,
    second_order_profiles_kp, second_order_profiles_zk, second_order_sources_kp, second_order_sources_zk,
    ProfileHierarchy,
};
use disperlim_core::spectral::io::{ensure_dir, write_field, write_json};
use disperlim_core::{Error, Grid, RealField, Result, ScalingParams};
use serde_json::json;

use crate::config::{EpRun, LimitRun, SolitonRun};

/// Normal completion, or a run that finished but failed its numerical check.
pub enum Outcome {
    Done,
    Failed(String),
}

pub struct Common {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Common {
    fn config(&self, cmd: &str) -> Result<&Path> {
        self.config
            .as_deref()
            .ok_or_else(|| Error::Config(format!("`{cmd}` needs --config <path.json>")))
    }

    fn out(&self, cmd: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("results").join(cmd))
    }
}

fn limit_cfg(run: &LimitRun, eq: LimitEquation) -> LimitConfig {
    let mut c = LimitConfig::new(eq, run.wave_speed(), run.dt, run.t_final);
    c.snapshot_every = run.snapshot_every;
    c.nonlinear_coeff = run.nonlinear_coeff;
    c.transverse_coeff = run.transverse_coeff;
    c.linear_background_coeff = run.linear_background_coeff;
    c
}

fn load_limit_run(common: &Common, cmd: &str, d: Option<usize>) -> Result<(LimitRun, Grid, RealField)> {
    let mut run = LimitRun::from_file(common.config(cmd)?)?;
    if let Some(d) = d {
        if run.d != d {
            return Err(Error::Config(format!("`{cmd}` runs in {d}D but the config has d = {}", run.d)));
        }
    }
    if let Some(s) = common.seed {
        run.seed = s;
    }
    let grid = run.grid.build()?;
    let n0 = initial_profile(&run.initial, &grid, run.wave_speed(), run.seed)?;
    Ok((run, grid, n0))
}

fn solve_n1(run: &LimitRun, n0: &RealField) -> Result<Trajectory> {
    if run.d == 2 {
        solve_kp2(n0, &limit_cfg(run, LimitEquation::Kp2))
    } else {
        solve_zk(n0, &limit_cfg(run, LimitEquation::Zk))
    }
}

fn solve_n2(run: &LimitRun, n1: &Trajectory) -> Result<Trajectory> {
    let zero = RealField::zeros(n1.first().grid());
    if run.d == 2 {
        let src = second_order_sources_kp(n1, run.wave_speed())?;
        solve_linearized_kp(&src, &zero, &limit_cfg(run, LimitEquation::LinKp))
    } else {
        let src = second_order_sources_zk(n1, run.wave_speed())?;
        solve_linearized_zk(&src, &zero, &limit_cfg(run, LimitEquation::LinZk))
    }
}

/// `model` is `None` for the forced n2 equation, which conserves nothing;
/// only the final norms are reported then.
fn save_trajectory(tr: &Trajectory, dir: &Path, name: &str, run: &LimitRun, model: Option<&LimitModel>) -> Result<()> {
    tr.save(dir, name, serde_json::to_value(run)?)?;
    match model {
        Some(model) => {
            let first = conserved_quantities(tr.first(), model);
            let last = conserved_quantities(tr.last(), model);
            let drift = last.relative_drift(&first);
            write_json(
                dir.join("invariants.json"),
                &json!({ "initial": first, "final": last, "relative_drift": drift }),
            )?;
            println!("{name}: {} snapshots to t = {}, invariant drift {drift:.3e}", tr.len(), tr.final_time());
        }
        None => {
            let last = tr.last();
            let (l2, max) = (last.l2(), last.max_abs());
            write_json(dir.join("norms.json"), &json!({ "final_l2": l2, "final_max_abs": max }))?;
            println!("{name}: {} snapshots to t = {}, final L2 {l2:.4e}, max {max:.4e}", tr.len(), tr.final_time());
        }
    }
    Ok(())
}

/// `kp` and `zk`.
pub fn limit(common: &Common, eq: LimitEquation) -> Result<Outcome> {
    let cmd = if eq == LimitEquation::Kp2 { "kp" } else { "zk" };
    let d = if eq == LimitEquation::Kp2 { 2 } else { 3 };
    let (run, _, n0) = load_limit_run(common, cmd, Some(d))?;
    let cfg = limit_cfg(&run, eq);
    let tr = solve_n1(&run, &n0)?;
    let out = common.out(cmd);
    save_trajectory(&tr, &out, "n1", &run, Some(&LimitModel::from_config(&cfg)))?;
    println!("wrote {}", out.display());
    Ok(Outcome::Done)
}

/// `lin-kp` and `lin-zk`: n1 from the nonlinear equation, then n2 from zero data.
pub fn linearized(common: &Common, eq: LimitEquation) -> Result<Outcome> {
    let cmd = if eq == LimitEquation::LinKp { "lin-kp" } else { "lin-zk" };
    let d = if eq == LimitEquation::LinKp { 2 } else { 3 };
    let (run, _, n0) = load_limit_run(common, cmd, Some(d))?;
    let n1 = solve_n1(&run, &n0)?;
    let n2 = solve_n2(&run, &n1)?;
    let out = common.out(cmd);
    let nl = LimitModel::from_config(&limit_cfg(&run, if d == 2 { LimitEquation::Kp2 } else { LimitEquation::Zk }));
    save_trajectory(&n1, &out.join("n1"), "n1", &run, Some(&nl))?;
    save_trajectory(&n2, &out.join("n2"), "n2", &run, None)?;
    println!("wrote {}", out.display());
    Ok(Outcome::Done)
}

fn build_hierarchy(run: &LimitRun, n0: &RealField) -> Result<ProfileHierarchy> {
    let v = run.wave_speed();
    let n1 = solve_n1(run, n0)?;
    let mut h = match (run.order, run.d) {
        (1, 2) => first_order_profiles_kp(n1.last(), v)?,
        (1, _) => first_order_profiles_zk(n1.last(), v)?,
        (_, 2) => second_order_profiles_kp(n1.last(), solve_n2(run, &n1)?.last(), v)?,
        _ => second_order_profiles_zk(n1.last(), solve_n2(run, &n1)?.last(), v)?,
    };
    h.time = n1.final_time();
    Ok(h)
}

pub fn profiles(common: &Common) -> Result<Outcome> {
    let (run, _, n0) = load_limit_run(common, "profiles", None)?;
    let h = build_hierarchy(&run, &n0)?;
    let out = common.out("profiles");
    h.save(&out)?;
    println!(
        "order-{} {}D hierarchy at t = {} ({} fields) written to {}",
        h.order,
        h.dim,
        h.time,
        h.field_names().len(),
        out.display()
    );
    Ok(Outcome::Done)
}

/// Checks a stored hierarchy (`hierarchy`) or one built from `--config`.
pub fn residuals(common: &Common, hierarchy: Option<&Path>, epsilon: f64) -> Result<Outcome> {
    let h = match hierarchy {
        Some(dir) => ProfileHierarchy::load(dir)?,
        None => {
            let (run, _, n0) = load_limit_run(common, "residuals", None)?;
            build_hierarchy(&run, &n0)?
        }
    };
    let p = ScalingParams::new(epsilon, h.ion_temperature(), h.dim)?;
    let report = residual_order_systems(&h, &p)?;
    for (name, r) in &report.equations {
        println!(
            "{:<5} {name:<16} L2 {:.3e}  H2 {:.3e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.l2,
            r.h2
        );
    }
    println!("tolerance {:.3e}", report.tolerance);
    if let Some(out) = &common.out {
        ensure_dir(out)?;
        write_json(out.join("residuals.json"), &report)?;
    }
    if report.pass() {
        println!("all {} systems PASS", report.equations.len());
        Ok(Outcome::Done)
    } else {
        let (worst, l2) = report.worst();
        Ok(Outcome::Failed(format!("residual check failed; worst {worst} = {l2:.3e}")))
    }
}

pub fn ep(common: &Common) -> Result<Outcome> {
    let mut run = EpRun::from_file(common.config("ep")?)?;
    if let Some(s) = common.seed {
        run.seed = s;
    }
    let grid = run.grid.build()?;
    let p = ScalingParams::new(run.epsilon, run.ion_temperature, run.d)?;
    let v = p.wave_speed();
    let n1 = initial_profile(&run.initial, &grid, v, run.seed)?;
    let h = match (run.order, run.d) {
        (1, 2) => first_order_profiles_kp(&n1, v)?,
        (1, _) => first_order_profiles_zk(&n1, v)?,
        (_, 2) => second_order_profiles_kp(&n1, &RealField::zeros(&grid), v)?,
        _ => second_order_profiles_zk(&n1, &RealField::zeros(&grid), v)?,
    };
    let state0 = assemble_initial_data(&h, &p)?;
    let stepper = run.stepper.stepper(&grid, &p);
    let times: Vec<f64> = (0..=run.samples)
        .map(|j| run.t_final * j as f64 / run.samples as f64)
        .collect();
    let (last, log) = run_ep_sampled(&state0, &times, &stepper, |_| Ok(()))?;
    let out = common.out("ep");
    ensure_dir(&out)?;
    write_field(out.join("n.fld"), &last.n, "n")?;
    for (i, u) in last.u.iter().enumerate() {
        write_field(out.join(format!("u{}.fld", i + 1)), u, &format!("u{}", i + 1))?;
    }
    write_field(out.join("phi.fld"), &last.phi, "phi")?;
    write_json(out.join("diagnostics.json"), &json!({ "config": run, "dt": stepper.dt, "log": log }))?;
    println!(
        "EP to t = {} in {} steps (dt = {:.3e}); min n = {:.6}; wrote {}",
        last.time,
        log.steps,
        stepper.dt,
        last.n.min(),
        out.display()
    );
    Ok(Outcome::Done)
}

pub fn converge(common: &Common) -> Result<Outcome> {
    let path = common.config("converge")?;
    let mut cfg = StudyConfig::from_file(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let table = run_convergence_study(&cfg)?;
    let out = common.out("converge");
    table.write(&out)?;
    println!("{:>8} {:>12} {:>12} {:>10}", "epsilon", "max err1", "max rem", "warnings");
    for s in &table.summaries {
        println!(
            "{:>8} {:>12.4e} {:>12.4e} {:>10}",
            s.epsilon,
            s.max_err1,
            s.max_remainder,
            s.warnings.len()
        );
    }
    match (&table.err1_fit, &table.fit_note) {
        (Some(f), _) => println!(
            "err1 order {:.3} (95% CI [{:.3}, {:.3}], r2 {:.4})",
            f.order, f.ci95[0], f.ci95[1], f.r2
        ),
        (None, Some(note)) => println!("no order fit: {note}"),
        (None, None) => {}
    }
    if let Some(spread) = table.remainder_spread {
        println!("{} remainder spread across epsilon: {spread:.3}x", table.norm_kind);
    }
    println!("wrote {}", out.display());
    match table.failure {
        Some(f) => Ok(Outcome::Failed(format!("study incomplete: {f}"))),
        None => Ok(Outcome::Done),
    }
}

pub fn soliton_test(common: &Common) -> Result<Outcome> {
    let run = match &common.config {
        Some(p) => SolitonRun::from_file(p)?,
        None => SolitonRun::default(),
    };
    let v = disperlim_core::spectral::wave_speed(run.ion_temperature);
    let grid = Grid::new(&[run.points, 8], &[run.length, 10.0])?;
    let x0 = 0.25 * run.length;
    let (f, c) = kdv_line_soliton(run.kappa, v, &grid, x0)?;
    let t = run.crossings * run.length / c;
    let mut cfg = LimitConfig::new(LimitEquation::Kp2, v, run.dt, t);
    cfg.snapshot_every = usize::MAX;
    let tr = solve_kp2(&f, &cfg)?;
    let model = LimitModel::from_config(&cfg);
    let drift = conserved_quantities(tr.last(), &model).relative_drift(&conserved_quantities(&f, &model));
    let expect = (x0 + c * t).rem_euclid(run.length);
    let got = peak_position(tr.last());
    let mut err = (got - expect).abs();
    err = err.min(run.length - err);
    let cells = err / grid.spacing(0);
    println!(
        "kappa {} V {v:.6}: speed {c:.6}, T = {t:.3}; peak {got:.4} vs {expect:.4} ({cells:.3} cells); mass/L2 drift {drift:.3e}",
        run.kappa
    );
    if let Some(out) = &common.out {
        ensure_dir(out)?;
        let report = json!({ "config": run, "speed": c, "time": t, "expected": expect, "measured": got, "cells": cells, "drift": drift });
        write_json(out.join("soliton.json"), &report)?;
    }
    if cells < 1.0 {
        println!("PASS");
        Ok(Outcome::Done)
    } else {
        Ok(Outcome::Failed(format!("soliton off by {cells:.2} cells")))
    }
}
