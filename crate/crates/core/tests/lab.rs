use std::f64::consts::PI;

use disperlim_core::euler_poisson::EPState;
use disperlim_core::lab::{
    compute_remainder, fit_order, initial_profile, remainder_norm_report, run_convergence_study, GridSpec, InitialSpec,
    RemainderState, StudyConfig, CSV_HEADER,
};
use disperlim_core::profile::{assemble_initial_data, first_order_profiles_kp, first_order_profiles_zk};
use disperlim_core::spectral::{project, x1_mean, Grid, RealField, ScalingParams};
use disperlim_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(amplitude: f64, width: f64) -> InitialSpec {
    InitialSpec::GaussianZeroMean {
        amplitude,
        width,
        transverse_width: None,
        center: None,
        derivatives: 2,
        carrier: None,
    }
}

/// Cheap 2D study for plumbing tests.
fn small_study() -> StudyConfig {
    let mut c = StudyConfig::default_2d();
    c.epsilons = vec![0.2, 0.1, 0.05];
    c.tau0 = 0.05;
    c.grid = GridSpec {
        dims: vec![32, 32],
        lengths: vec![30.0, 30.0],
    };
    c.initial = gaussian(0.1, 3.0);
    c
}

fn kp_setup(eps: f64) -> (Grid, ScalingParams, RealField) {
    let g = Grid::new(&[32, 32], &[30.0, 30.0]).unwrap();
    let p = ScalingParams::new(eps, 1.0, 2).unwrap();
    let n1 = initial_profile(&gaussian(0.2, 3.0), &g, p.wave_speed(), 0).unwrap();
    (g, p, n1)
}

#[test]
fn fit_recovers_exact_power() {
    let pts: Vec<(f64, f64)> = [0.2, 0.141, 0.1, 0.071, 0.05].iter().map(|&e| (e, 3.0 * e * e)).collect();
    let f = fit_order(&pts).unwrap();
    assert!((f.order - 2.0).abs() < 1e-12, "{}", f.order);
    assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
    assert!((f.r2 - 1.0).abs() < 1e-12);
    assert!(f.ci95[0] <= 2.0 + 1e-9 && f.ci95[1] >= 2.0 - 1e-9);
}

#[test]
fn fit_of_constant_is_order_zero() {
    let f = fit_order(&[(0.2, 1.5), (0.1, 1.5), (0.05, 1.5)]).unwrap();
    assert!(f.order.abs() < 1e-12);
}

#[test]
fn fit_tolerates_small_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts: Vec<(f64, f64)> = (0..8)
        .map(|j| {
            let e = 0.2 * 0.8f64.powi(j);
            (e, e.powf(1.5) * (1.0 + 0.01 * rng.random_range(-1.0..1.0)))
        })
        .collect();
    let f = fit_order(&pts).unwrap();
    assert!((f.order - 1.5).abs() < 0.05, "{}", f.order);
    assert!(f.ci95[0] < 1.5 && 1.5 < f.ci95[1]);
    assert!(f.r2 > 0.99);
}

#[test]
fn fit_rejects_degenerate_input() {
    let undefined = |pts: &[(f64, f64)]| matches!(fit_order(pts), Err(Error::UndefinedFit(_)));
    assert!(undefined(&[(0.2, 1.0), (0.1, 0.5)]));
    assert!(undefined(&[(0.2, 1.0), (0.1, 0.0), (0.05, 0.1)]));
    assert!(undefined(&[(0.2, 1.0), (0.1, -1.0), (0.05, 0.1)]));
    assert!(undefined(&[(0.2, 1.0), (0.0, 1.0), (0.05, 0.1)]));
    assert!(undefined(&[(0.1, 1.0), (0.1, 2.0), (0.1, 0.1)]));
    assert!(undefined(&[(0.2, f64::NAN), (0.1, 1.0), (0.05, 0.1)]));
}

#[test]
fn remainder_of_assembled_data_is_the_potential_gap() {
    for &eps in &[0.2, 0.05] {
        let (_, p, n1) = kp_setup(eps);
        let h = first_order_profiles_kp(&n1, p.wave_speed()).unwrap();
        let s = assemble_initial_data(&h, &p).unwrap();
        let r = compute_remainder(&s, &h, &p).unwrap();
        assert!(r.n_r.l2() <= 1e-10, "{}", r.n_r.l2());
        for u in &r.u_r {
            assert!(u.l2() <= 1e-10);
        }
        let gap = (&s.phi - &h.profile_potential(eps).unwrap()) * (1.0 / (eps * eps));
        assert!((&r.phi_r - &gap).max_abs() <= 1e-9);
        assert_eq!(r.epsilon, eps);
    }
}

#[test]
fn remainder_against_zero_profiles() {
    let eps = 0.1;
    let (g, p, _) = kp_setup(eps);
    let h = first_order_profiles_kp(&RealField::zeros(&g), p.wave_speed()).unwrap();
    let bump = project(&RealField::from_fn(&g, |x| {
        (-((x[0] - 15.0).powi(2) + (x[1] - 12.0).powi(2)) / 9.0).exp()
    }));
    let n = &RealField::constant(&g, 1.0) + &(&bump * (eps * eps));
    let s = EPState::new(n, vec![RealField::zeros(&g); 2], p, 0.0).unwrap();
    let r = compute_remainder(&s, &h, &p).unwrap();
    assert!((&r.n_r - &bump).max_abs() <= 1e-10);
    assert!(r.u_r.iter().all(|u| u.max_abs() == 0.0));

    let plain = EPState::uniform(&g, p).unwrap();
    let r0 = compute_remainder(&plain, &h, &p).unwrap();
    let mut shifted = plain.clone();
    shifted.n += &(&bump * (eps * eps));
    let r1 = compute_remainder(&shifted, &h, &p).unwrap();
    assert!((&(&r1.n_r - &r0.n_r) - &bump).max_abs() <= 1e-10);
}

#[test]
fn remainder_rejects_mismatched_inputs() {
    let (g, p, n1) = kp_setup(0.1);
    let mut h = first_order_profiles_kp(&n1, p.wave_speed()).unwrap();
    let s = EPState::uniform(&g, p).unwrap();
    h.time = 0.3;
    assert!(matches!(compute_remainder(&s, &h, &p), Err(Error::Config(_))));
    h.time = 0.0;
    let other = ScalingParams::new(0.1, 3.0, 2).unwrap();
    assert!(matches!(compute_remainder(&s, &h, &other), Err(Error::Config(_))));
    let g2 = Grid::new(&[16, 16], &[30.0, 30.0]).unwrap();
    let s2 = EPState::uniform(&g2, p).unwrap();
    assert!(matches!(compute_remainder(&s2, &h, &p), Err(Error::Config(_))));
}

fn zero_remainder(g: &Grid, eps: f64) -> RemainderState {
    RemainderState {
        n_r: RealField::zeros(g),
        u_r: vec![RealField::zeros(g); g.rank()],
        phi_r: RealField::zeros(g),
        epsilon: eps,
        time: 0.0,
    }
}

#[test]
fn report_of_zero_remainder_is_zero() {
    let cfg = small_study();
    let g = cfg.grid.build().unwrap();
    let rep = remainder_norm_report(&zero_remainder(&g, 0.1), &cfg).unwrap();
    assert_eq!(rep.sobolev.total, 0.0);
    assert!(rep.triple.is_none());
    assert!(rep.warning.is_none());
    assert_eq!(rep.s, 4);
}

#[test]
fn report_matches_single_mode_multipliers() {
    let mut cfg = StudyConfig::default_3d();
    cfg.grid = GridSpec {
        dims: vec![16, 16, 16],
        lengths: vec![2.0 * PI, 2.0 * PI, 2.0 * PI],
    };
    let g = cfg.grid.build().unwrap();
    let eps = 0.1;
    let p = cfg.params(eps).unwrap();
    let k = [2.0, 1.0, 0.0];
    let wave = RealField::from_fn(&g, |x| (k[0] * x[0] + k[1] * x[1]).cos());
    let mut r = zero_remainder(&g, eps);
    r.n_r = wave.clone();
    r.u_r[1] = wave.clone();
    r.phi_r = wave.clone();
    let rep = remainder_norm_report(&r, &cfg).unwrap();
    let half_vol = 0.5 * g.volume();
    let ksq = k[0] * k[0] + k[1] * k[1];
    let hs = (half_vol * (1.0 + ksq).powi(4)).sqrt();
    let kb = p.kbar_sq(&k);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * b;
    assert!(close(rep.sobolev.n, hs));
    assert!(close(rep.sobolev.u, hs));
    assert!(close(rep.sobolev.phi, hs));
    let t = rep.triple.expect("T_i = 0 reports triple norms");
    assert!(close(t.n, hs));
    assert!(close(t.u, hs * (1.0 + eps * kb).sqrt()));
    assert!(close(t.phi, hs * (1.0 + eps * kb + eps * eps * kb * kb).sqrt()));
    assert!(t.total >= rep.sobolev.total);
    assert_eq!(rep.selected(), &t);
    assert!(rep.warning.is_none());
}

#[test]
fn report_warns_about_unresolved_tails() {
    let cfg = small_study();
    let g = cfg.grid.build().unwrap();
    let l = g.lengths()[0];
    let mut r = zero_remainder(&g, 0.1);
    // mode 12 sits outside the dealiased band of a 32-point axis
    r.n_r = RealField::from_fn(&g, |x| (2.0 * PI * 12.0 * x[0] / l).cos() + (2.0 * PI * x[1] / l).sin());
    let rep = remainder_norm_report(&r, &cfg).unwrap();
    let w = rep.warning.expect("tail warning");
    assert!(w.contains("n ("), "{w}");
    assert!(!w.contains("phi"), "{w}");
}

#[test]
fn report_rejects_non_finite_norms() {
    let cfg = small_study();
    let g = cfg.grid.build().unwrap();
    let mut r = zero_remainder(&g, 0.1);
    r.phi_r = RealField::constant(&g, f64::NAN);
    assert!(matches!(remainder_norm_report(&r, &cfg), Err(Error::Numerical(_))));
}

#[test]
fn defaults_validate_and_roundtrip() {
    for cfg in [StudyConfig::default_2d(), StudyConfig::default_3d()] {
        cfg.validate().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        assert_eq!(StudyConfig::from_file(&path).unwrap(), cfg);
    }
    let d3 = StudyConfig::default_3d();
    assert_eq!((d3.d, d3.ion_temperature), (3, 0.0));
    assert!(d3.uses_triple_norm());
    assert!(!StudyConfig::default_2d().uses_triple_norm());
}

#[test]
fn minimal_json_fills_defaults() {
    let json = r#"{
        "schema_version": 1, "d": 2, "ion_temperature": 1.0,
        "epsilons": [0.2, 0.1, 0.05], "tau0": 0.5,
        "grid": {"dims": [64, 64], "lengths": [40.0, 40.0]},
        "initial": {"family": "gaussian_zero_mean", "amplitude": 0.25, "width": 4.0}
    }"#;
    let cfg: StudyConfig = serde_json::from_str(json).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.s_prime, 4);
    assert_eq!(cfg.truncation_order, 1);
    assert_eq!(cfg.samples, 10);
    assert_eq!(cfg.stepper.c_cfl, 0.5);
    assert_eq!(cfg.limit.dt, 0.01);
    assert_eq!(cfg.seed, 0);
    match cfg.initial {
        InitialSpec::GaussianZeroMean { derivatives, .. } => assert_eq!(derivatives, 3),
        _ => panic!("wrong family"),
    }
    let unknown = json.replace("\"tau0\"", "\"tau_zero\": 1, \"tau0\"");
    assert!(serde_json::from_str::<StudyConfig>(&unknown).is_err());
    let bad_family = json.replace("gaussian_zero_mean", "top_hat");
    assert!(serde_json::from_str::<StudyConfig>(&bad_family).is_err());
}

#[test]
fn validation_rejects_bad_configs() {
    let bad = |f: &dyn Fn(&mut StudyConfig)| {
        let mut c = StudyConfig::default_2d();
        f(&mut c);
        matches!(c.validate(), Err(Error::Config(_)) | Err(Error::Domain(_)))
    };
    assert!(bad(&|c| c.schema_version = 2));
    assert!(bad(&|c| c.d = 4));
    assert!(bad(&|c| c.ion_temperature = 0.0));
    assert!(bad(&|c| c.ion_temperature = -1.0));
    assert!(bad(&|c| c.epsilons = vec![0.2, 0.1]));
    assert!(bad(&|c| c.epsilons = vec![0.1, 0.2, 0.05]));
    assert!(bad(&|c| c.epsilons = vec![0.8, 0.2, 0.1]));
    assert!(bad(&|c| c.epsilons = vec![0.2, 0.1, 0.0]));
    assert!(bad(&|c| c.tau0 = 0.0));
    assert!(bad(&|c| c.s_prime = 3));
    assert!(bad(&|c| c.truncation_order = 3));
    assert!(bad(&|c| c.samples = 5));
    assert!(bad(&|c| c.grid.dims = vec![32, 32, 32]));
    assert!(bad(&|c| c.stepper.c_cfl = 0.0));
    assert!(bad(&|c| c.limit.dt = -1.0));
    assert!(bad(&|c| c.initial = gaussian(1.0, 0.0)));
    assert!(bad(&|c| {
        c.initial = InitialSpec::GaussianZeroMean {
            amplitude: 1.0,
            width: 3.0,
            transverse_width: None,
            center: None,
            derivatives: 0,
            carrier: None,
        }
    }));
    assert!(bad(&|c| {
        c.initial = InitialSpec::GaussianZeroMean {
            amplitude: 1.0,
            width: 3.0,
            transverse_width: None,
            center: Some(vec![1.0]),
            derivatives: 1,
            carrier: None,
        }
    }));
    assert!(bad(&|c| {
        c.initial = InitialSpec::ModePacket {
            amplitude: 1.0,
            modes: 3,
            max_mode: 43,
        }
    }));
    assert!(bad(&|c| c.initial = InitialSpec::KdvSoliton { kappa: -0.5, x0: None }));
    assert!(!bad(&|c| c.initial = InitialSpec::ModePacket {
        amplitude: 1.0,
        modes: 3,
        max_mode: 42,
    }));
}

#[test]
fn sampling_schedule() {
    let mut c = StudyConfig::default_2d();
    let t = c.sample_times();
    assert_eq!(t.len(), 11);
    assert_eq!(t[0], 0.0);
    assert_eq!(t[10], 0.5);
    let (dt, per) = c.limit_steps();
    assert_eq!(per, 5);
    assert!((dt - 0.01).abs() < 1e-15);
    c.limit.dt = 0.03;
    let (dt, per) = c.limit_steps();
    assert_eq!(per, 2);
    assert!((dt - 0.025).abs() < 1e-15);
}

#[test]
fn initial_families() {
    let g = Grid::new(&[64, 64], &[40.0, 40.0]).unwrap();
    let v = 2f64.sqrt();
    let check_kp = |f: &RealField| {
        let mean = f.mean();
        let rest = &x1_mean(f) - &RealField::constant(&g, mean);
        assert!(rest.max_abs() <= 1e-12);
    };

    let f = initial_profile(&gaussian(0.25, 4.0), &g, v, 0).unwrap();
    assert!((f.max_abs() - 0.25).abs() <= 1e-6, "{}", f.max_abs());
    assert!(f.mean().abs() <= 1e-12);
    check_kp(&f);

    let aniso = InitialSpec::GaussianZeroMean {
        amplitude: 1.0,
        width: 2.0,
        transverse_width: Some(5.0),
        center: Some(vec![15.0, 22.0]),
        derivatives: 1,
        carrier: Some(0.8),
    };
    let f = initial_profile(&aniso, &g, v, 0).unwrap();
    check_kp(&f);
    assert!((f.max_abs() - 1.0).abs() <= 1e-3);

    let packet = InitialSpec::ModePacket {
        amplitude: 0.5,
        modes: 6,
        max_mode: 5,
    };
    let a = initial_profile(&packet, &g, v, 11).unwrap();
    let b = initial_profile(&packet, &g, v, 11).unwrap();
    let c = initial_profile(&packet, &g, v, 12).unwrap();
    assert_eq!(a, b);
    assert!((&a - &c).max_abs() > 1e-3);
    assert!((a.max_abs() - 0.5).abs() <= 1e-12);
    check_kp(&a);

    let sol = initial_profile(&InitialSpec::KdvSoliton { kappa: 1.0, x0: None }, &g, v, 0).unwrap();
    assert!(sol.max_abs() > 0.0);
    check_kp(&sol);

    let g3 = Grid::new(&[16, 16, 16], &[20.0, 20.0, 20.0]).unwrap();
    let f3 = initial_profile(&gaussian(0.25, 3.0), &g3, 1.0, 0).unwrap();
    assert!((f3.max_abs() - 0.25).abs() <= 1e-2);
    let h = first_order_profiles_zk(&f3, 1.0).unwrap();
    assert_eq!(h.dim, 3);
}

#[test]
fn zero_amplitude_study_has_no_fit() {
    let mut cfg = small_study();
    cfg.initial = gaussian(0.0, 3.0);
    let t = run_convergence_study(&cfg).unwrap();
    assert!(t.complete());
    assert_eq!(t.rows.len(), 3 * 11);
    assert!(t.rows.iter().all(|r| r.err1 == 0.0 && r.n == 0.0 && r.u == 0.0 && r.phi == 0.0));
    assert!(t.err1_fit.is_none());
    assert!(t.fit_note.as_deref().is_some_and(|n| n.contains("not positive")));
    assert!(t.remainder_spread.is_none());
}

#[test]
fn small_study_is_deterministic_and_well_formed() {
    let cfg = small_study();
    let a = run_convergence_study(&cfg).unwrap();
    let b = run_convergence_study(&cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.complete());
    assert_eq!(a.norm_kind, "H4");
    let csv = a.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 33);
    for w in a.rows.windows(2) {
        assert!(w[0].epsilon > w[1].epsilon || (w[0].epsilon == w[1].epsilon && w[0].time < w[1].time));
    }
    assert_eq!(a.summaries.len(), 3);
    for s in &a.summaries {
        assert!((s.dt - 0.5 * s.epsilon * 30.0 / 32.0).abs() < 1e-15);
        assert!(s.initial_remainder <= 1e-8);
        assert!(s.max_err1 > 0.0);
    }
    assert!(a.err1_fit.is_some());

    let dir = tempfile::tempdir().unwrap();
    a.write(dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(dir.path().join("table.csv")).unwrap(), csv);
    for k in 0..3 {
        assert!(dir.path().join(format!("diagnostics/eps_{k}.json")).exists());
    }
    let back: disperlim_core::lab::ConvergenceTable =
        serde_json::from_slice(&std::fs::read(dir.path().join("table.json")).unwrap()).unwrap();
    assert_eq!(back.to_csv(), csv);
}

#[test]
fn study_reports_failing_runs_without_a_fit() {
    let mut cfg = small_study();
    // density goes negative at the largest epsilon only
    cfg.initial = gaussian(6.0, 3.0);
    let t = run_convergence_study(&cfg).unwrap();
    assert!(!t.complete());
    assert!(t.failure.as_deref().unwrap().starts_with("eps = 0.2"));
    assert!(t.err1_fit.is_none());
    assert!(t.rows.iter().all(|r| r.epsilon != 0.2));
}
