use std::f64::consts::PI;

use disperlim_core::euler_poisson::{step_ep, StepperConfig};
use disperlim_core::limit::{
    solve_kp2, solve_linearized_kp, solve_linearized_zk, solve_zk, LimitConfig, LimitEquation, Trajectory,
};
use disperlim_core::profile::{
    assemble_initial_data, first_order_profiles_kp, first_order_profiles_zk, kp_source_closed_form,
    residual_order_systems, second_order_profiles_kp, second_order_profiles_zk, second_order_profiles_zk_coeff,
    second_order_source, second_order_sources_kp, second_order_sources_zk, ProfileHierarchy,
};
use disperlim_core::spectral::{
    dealiased_product, project, spectral_derivative as d, x1_mean, Grid, RealField, ScalingParams,
};
use disperlim_core::Error;

fn kp_grid() -> Grid {
    Grid::new(&[64, 64], &[20.0, 20.0]).unwrap()
}

fn zk_grid() -> Grid {
    Grid::new(&[32, 32, 32], &[16.0, 16.0, 16.0]).unwrap()
}

fn kp_data(g: &Grid, amp: f64) -> RealField {
    let l = g.lengths()[0];
    let bump = RealField::from_fn(g, |x| {
        let (a, b) = (x[0] - 0.5 * l, x[1] - 0.5 * l);
        amp * (-(a * a + b * b) / 4.0).exp()
    });
    project(&d(&bump, 0, 1).unwrap())
}

fn zk_data(g: &Grid, amp: f64) -> RealField {
    let l = g.lengths()[0];
    project(&RealField::from_fn(g, |x| {
        let r2 = (x[0] - 0.5 * l).powi(2) + (x[1] - 0.45 * l).powi(2) + (x[2] - 0.55 * l).powi(2);
        amp * (-r2 / 4.0).exp()
    }))
}

fn dd(f: &RealField, axis: usize, order: u32) -> RealField {
    d(f, axis, order).unwrap()
}

/// n1 and n2 trajectories up to t.
fn kp_run(ti: f64, t: f64) -> (Trajectory, Trajectory, f64) {
    let g = kp_grid();
    let v = (ti + 1.0f64).sqrt();
    let cfg = LimitConfig::new(LimitEquation::Kp2, v, 0.01, t);
    let n1 = solve_kp2(&kp_data(&g, 0.5), &cfg).unwrap();
    let n2 = {
        let src = second_order_sources_kp(&n1, v).unwrap();
        let cfg = LimitConfig::new(LimitEquation::LinKp, v, 0.01, t);
        solve_linearized_kp(&src, &RealField::zeros(&g), &cfg).unwrap()
    };
    (n1, n2, v)
}

fn zk_run(ti: f64, t: f64) -> (Trajectory, Trajectory, f64) {
    let g = zk_grid();
    let v = (ti + 1.0f64).sqrt();
    let cfg = LimitConfig::new(LimitEquation::Zk, v, 0.01, t);
    let n1 = solve_zk(&zk_data(&g, 0.5), &cfg).unwrap();
    let n2 = {
        let src = second_order_sources_zk(&n1, v).unwrap();
        let cfg = LimitConfig::new(LimitEquation::LinZk, v, 0.01, t);
        solve_linearized_zk(&src, &RealField::zeros(&g), &cfg).unwrap()
    };
    (n1, n2, v)
}

fn params(h: &ProfileHierarchy, eps: f64) -> ScalingParams {
    ScalingParams::new(eps, h.ion_temperature(), h.dim).unwrap()
}

fn assert_residuals_pass(h: &ProfileHierarchy) {
    let r = residual_order_systems(h, &params(h, 0.1)).unwrap();
    for (k, e) in &r.equations {
        assert!(e.l2.is_finite() && e.l2 >= 0.0 && e.h2 >= 0.0, "{k}");
        assert!(e.pass, "{k}: {:.3e} > {:.3e}", e.l2, r.tolerance);
    }
    assert!(r.pass());
}

fn assert_corruption_detected(h: &ProfileHierarchy) {
    for name in h.field_names() {
        let mut bad = h.clone();
        let delta = &h.n1 * 1e-3;
        *bad.field_mut(&name).unwrap() += &delta;
        let r = residual_order_systems(&bad, &params(h, 0.1)).unwrap();
        let (which, worst) = r.worst();
        assert!(!r.pass(), "corrupting {name} went unnoticed");
        assert!(worst >= 100.0 * r.tolerance, "{name}: worst {which} {worst:.3e}");
    }
}

fn sincos() -> RealField {
    let g = Grid::new(&[32, 32], &[2.0 * PI, 2.0 * PI]).unwrap();
    RealField::from_fn(&g, |x| x[0].sin() * x[1].cos())
}

#[test]
fn kp_first_order_identities() {
    for (n1, v) in [(sincos(), 1.0), (kp_data(&kp_grid(), 0.5), 2f64.sqrt())] {
        let h = first_order_profiles_kp(&n1, v).unwrap();
        assert_eq!(h.order, 1);
        assert_eq!(h.phi1.values(), n1.values());
        assert_eq!(h.u1_1.values(), (&n1 * v).values());
        let rel = &dd(&h.u2_1, 0, 1) - &(dd(&n1, 1, 1) * v);
        assert!(rel.max_abs() <= 1e-10, "{:.3e}", rel.max_abs());
    }
}

#[test]
fn kp_sincos_transverse_velocity() {
    // d1^{-1} d2 [sin x cos y] = cos x sin y
    let h = first_order_profiles_kp(&sincos(), 1.0).unwrap();
    let want = RealField::from_fn(h.grid(), |x| x[0].cos() * x[1].sin());
    assert!((&h.u2_1 - &want).max_abs() <= 1e-12);
}

#[test]
fn kp_rejects_constrained_data() {
    let g = kp_grid();
    let n1 = RealField::from_fn(&g, |x| (2.0 * PI * x[1] / 20.0).sin());
    assert!(matches!(first_order_profiles_kp(&n1, 1.0), Err(Error::Constraint { .. })));
    let ok = kp_data(&g, 0.5);
    assert!(matches!(second_order_profiles_kp(&ok, &n1, 1.0), Err(Error::Constraint { .. })));
    let g3 = zk_grid();
    assert!(matches!(first_order_profiles_kp(&zk_data(&g3, 0.1), 1.0), Err(Error::Config(_))));
    assert!(matches!(first_order_profiles_zk(&ok, 1.0), Err(Error::Config(_))));
    assert!(matches!(first_order_profiles_kp(&ok, 0.5), Err(Error::Config(_))));
}

#[test]
fn kp_zero_data_gives_zero_profiles() {
    let g = kp_grid();
    let zero = RealField::zeros(&g);
    let h = second_order_profiles_kp(&zero, &zero, 1.0).unwrap();
    for name in h.field_names() {
        assert_eq!(h.field(&name).unwrap().max_abs(), 0.0, "{name}");
    }
    let r = residual_order_systems(&h, &params(&h, 0.1)).unwrap();
    assert!(r.equations.values().all(|e| e.l2 == 0.0));

    let n2 = kp_data(&g, 0.3);
    let v = 2f64.sqrt();
    let h = second_order_profiles_kp(&zero, &n2, v).unwrap();
    assert!((h.u1_2.as_ref().unwrap() - &(&n2 * v)).max_abs() <= 1e-15);
    assert!((h.phi2.as_ref().unwrap() - &n2).max_abs() <= 1e-15);
    assert_residuals_pass(&h);
}

#[test]
fn kp_potential_correction() {
    let g = kp_grid();
    let n1 = kp_data(&g, 0.5);
    let n2 = kp_data(&g, 0.2);
    let h = second_order_profiles_kp(&n1, &n2, 1.0).unwrap();
    let sq = n1.zip_map(&n1, |a, b| a * b);
    let want = &dd(&n1, 0, 2) - &(sq * 0.5);
    let got = h.phi2.as_ref().unwrap() - &n2;
    assert!((&got - &want).max_abs() <= 1e-10, "{:.3e}", (&got - &want).max_abs());
}

#[test]
fn kp_residuals_pass_along_limit_solutions() {
    for ti in [0.0, 1.0] {
        let (n1, n2, v) = kp_run(ti, 0.2);
        let h1 = first_order_profiles_kp(n1.last(), v).unwrap();
        assert_residuals_pass(&h1);
        let h2 = second_order_profiles_kp(n1.last(), n2.last(), v).unwrap();
        assert_residuals_pass(&h2);
        assert_corruption_detected(&h1);
        assert_corruption_detected(&h2);
    }
}

#[test]
fn kp_perturbed_velocity_residual_scales_with_data() {
    let g = kp_grid();
    let n1 = kp_data(&g, 0.5);
    let mut h = first_order_profiles_kp(&n1, 1.0).unwrap();
    h.u1_1 += &(&n1 * 1e-3);
    let r = residual_order_systems(&h, &params(&h, 0.1)).unwrap();
    let got = r.equations["eps1.cont"].l2;
    let want = 1e-3 * dd(&n1, 0, 1).l2();
    assert!((got - want).abs() <= 1e-6 * want, "{got:.6e} vs {want:.6e}");
}

#[test]
fn kp_source_two_paths_agree() {
    let g = Grid::new(&[32, 32], &[2.0 * PI, 2.0 * PI]).unwrap();
    let single = RealField::from_fn(&g, |x| 0.3 * (x[0] + x[1]).cos());
    let mixed = RealField::from_fn(&g, |x| 0.3 * (x[0] + x[1]).cos() + 0.2 * (2.0 * x[0] - x[1]).sin());
    for (n1, v) in [(single, 1.0), (mixed, 1.5), (kp_data(&kp_grid(), 0.5), 2f64.sqrt())] {
        let a = second_order_source(&n1, v).unwrap();
        let b = kp_source_closed_form(&n1, v).unwrap();
        assert!(a.l2() > 0.0);
        let diff = (&a - &b).max_abs();
        assert!(diff <= 1e-9, "paths differ by {diff:.3e}");
        assert!(x1_mean(&a).max_abs() <= 1e-10 * (1.0 + a.max_abs()));
    }
    let zero = RealField::zeros(&g);
    assert_eq!(second_order_source(&zero, 1.0).unwrap().max_abs(), 0.0);
    assert_eq!(kp_source_closed_form(&zero, 1.0).unwrap().max_abs(), 0.0);
}

#[test]
fn zk_first_order_identities() {
    let g = zk_grid();
    let n1 = zk_data(&g, 0.5);
    for v in [1.0, 2f64.sqrt()] {
        let h = first_order_profiles_zk(&n1, v).unwrap();
        assert_eq!(h.phi1.values(), n1.values());
        assert_eq!(h.u1_1.values(), (&n1 * v).values());
        let u3 = h.u3_1.as_ref().unwrap();
        assert!((&h.u2_1 + &(dd(&n1, 2, 1) * (v * v))).max_abs() <= 1e-10);
        assert!((u3 - &(dd(&n1, 1, 1) * (v * v))).max_abs() <= 1e-10);
        let div = &dd(&h.u2_1, 1, 1) + &dd(u3, 2, 1);
        assert!(div.max_abs() <= 1e-12, "{:.3e}", div.max_abs());
        let div2 = &dd(h.u2_2.as_ref().unwrap(), 1, 1) + &dd(h.u3_2.as_ref().unwrap(), 2, 1);
        let lap_perp = &dd(&n1, 1, 2) + &dd(&n1, 2, 2);
        let want = dd(&lap_perp, 0, 1) * v.powi(3);
        assert!((&div2 - &want).max_abs() <= 1e-10);
    }
}

#[test]
fn zk_zero_data_gives_zero_profiles() {
    let g = zk_grid();
    let zero = RealField::zeros(&g);
    let h = second_order_profiles_zk(&zero, &zero, 1.0).unwrap();
    for name in h.field_names() {
        assert_eq!(h.field(&name).unwrap().max_abs(), 0.0, "{name}");
    }
    let n2 = zk_data(&g, 0.2);
    let v = 2f64.sqrt();
    let h = second_order_profiles_zk(&zero, &n2, v).unwrap();
    assert!((h.u1_2.as_ref().unwrap() - &(&n2 * v)).max_abs() <= 1e-15);
    assert!((h.phi2.as_ref().unwrap() - &n2).max_abs() <= 1e-15);
}

#[test]
fn zk_potential_correction() {
    let g = Grid::new(&[16, 16, 16], &[2.0 * PI, 2.0 * PI, 2.0 * PI]).unwrap();
    let n1 = RealField::from_fn(&g, |x| 0.4 * x[0].sin() * x[1].cos() + 0.3 * (x[1] - 2.0 * x[2]).cos());
    let n2 = RealField::from_fn(&g, |x| 0.1 * (x[0] + x[2]).sin());
    let h = second_order_profiles_zk(&n1, &n2, 1.0).unwrap();
    let lap = &(&dd(&n1, 0, 2) + &dd(&n1, 1, 2)) + &dd(&n1, 2, 2);
    let want = &lap - &(n1.zip_map(&n1, |a, b| a * b) * 0.5);
    let got = h.phi2.as_ref().unwrap() - &n2;
    assert!((&got - &want).max_abs() <= 1e-10, "{:.3e}", (&got - &want).max_abs());
}

#[test]
fn zk_residuals_pass_along_limit_solutions() {
    for ti in [0.0, 1.0] {
        let (n1, n2, v) = zk_run(ti, 0.2);
        let h1 = first_order_profiles_zk(n1.last(), v).unwrap();
        assert_residuals_pass(&h1);
        let h2 = second_order_profiles_zk(n1.last(), n2.last(), v).unwrap();
        assert_residuals_pass(&h2);
        assert_corruption_detected(&h1);
        assert_corruption_detected(&h2);

        // divergence of the order-3/2 transverse velocities balances the transport
        let n = n1.last();
        let mut c = &dd(h2.field("u2_3").unwrap(), 1, 1) + &dd(h2.field("u3_3").unwrap(), 2, 1);
        c += &dd(&dealiased_product(n, &h2.u2_1), 1, 1);
        c += &dd(&dealiased_product(n, h2.u3_1.as_ref().unwrap()), 2, 1);
        assert!(c.l2() <= 1e-9, "{:.3e}", c.l2());
    }
}

#[test]
fn zk_unit_coefficient_only_consistent_without_ion_temperature() {
    for (ti, consistent) in [(0.0, true), (1.0, false)] {
        let (n1, n2, v) = zk_run(ti, 0.1);
        let h = second_order_profiles_zk_coeff(n1.last(), n2.last(), v, 1.0).unwrap();
        let r = residual_order_systems(&h, &params(&h, 0.1)).unwrap();
        assert_eq!(r.pass(), consistent, "T_i = {ti}: {:?}", r.worst());
    }
}

#[test]
fn residuals_need_matching_parameters_and_fields() {
    let g = kp_grid();
    let n1 = kp_data(&g, 0.5);
    let h = second_order_profiles_kp(&n1, &kp_data(&g, 0.1), 1.0).unwrap();
    let p3 = ScalingParams::new(0.1, 0.0, 3).unwrap();
    assert!(matches!(residual_order_systems(&h, &p3), Err(Error::Config(_))));
    let pv = ScalingParams::new(0.1, 1.0, 2).unwrap();
    assert!(matches!(residual_order_systems(&h, &pv), Err(Error::Config(_))));
    let mut missing = h.clone();
    missing.phi2 = None;
    assert!(matches!(residual_order_systems(&missing, &params(&h, 0.1)), Err(Error::Config(_))));
    let mut missing = h.clone();
    missing.aux.remove("u1_kp");
    assert!(residual_order_systems(&missing, &params(&h, 0.1)).is_err());
}

#[test]
fn initial_potential_gap_is_second_order() {
    let g = kp_grid();
    let n1 = kp_data(&g, 0.5);
    let h = first_order_profiles_kp(&n1, 1.0).unwrap();
    let eps = [0.2, 0.1, 0.05];
    let gaps: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let s = assemble_initial_data(&h, &params(&h, e)).unwrap();
            (&s.phi - &(&h.phi1 * e)).l2()
        })
        .collect();
    for w in gaps.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() <= 0.3, "order {order:.3} from {gaps:?}");
    }
}

#[test]
fn initial_data_density_bound_and_positivity() {
    let g = zk_grid();
    let n1 = zk_data(&g, 1.0);
    let h = first_order_profiles_zk(&n1, 1.0).unwrap();
    let eps = 0.1;
    let s = assemble_initial_data(&h, &params(&h, eps)).unwrap();
    assert!(s.n.min() >= 1.0 - eps * n1.max_abs() - 1e-14);
    assert_eq!(s.u.len(), 3);
    // u2 = eps (sqrt(eps) u2_1 + eps u2_2)
    let want = &(&h.u2_1 * eps.powf(1.5)) + &(h.u2_2.as_ref().unwrap() * (eps * eps));
    assert!((&s.u[1] - &want).max_abs() <= 1e-15);

    let big = first_order_profiles_zk(&zk_data(&g, -8.0), 1.0).unwrap();
    assert!(matches!(
        assemble_initial_data(&big, &params(&big, 0.2)),
        Err(Error::Positivity { .. })
    ));
    let p2 = ScalingParams::new(0.1, 0.0, 2).unwrap();
    assert!(matches!(assemble_initial_data(&h, &p2), Err(Error::Config(_))));
    let pv = ScalingParams::new(0.1, 3.0, 3).unwrap();
    assert!(matches!(assemble_initial_data(&h, &pv), Err(Error::Config(_))));
}

#[test]
fn zero_hierarchy_is_a_steady_state() {
    let g = kp_grid();
    let zero = RealField::zeros(&g);
    let h = second_order_profiles_kp(&zero, &zero, 1.0).unwrap();
    let s = assemble_initial_data(&h, &params(&h, 0.1)).unwrap();
    assert!(s.n.values().iter().all(|&x| x == 1.0));
    assert!(s.u.iter().all(|u| u.max_abs() == 0.0));
    assert!(s.phi.max_abs() <= 1e-14);
    let next = step_ep(&s, &StepperConfig::new(0.01)).unwrap();
    assert!((&next.n - &s.n).max_abs() <= 1e-14);
    assert!(next.u.iter().all(|u| u.max_abs() <= 1e-14));
}

#[test]
fn hierarchy_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let g = zk_grid();
    let mut h = second_order_profiles_zk(&zk_data(&g, 0.5), &zk_data(&g, 0.1), 2f64.sqrt()).unwrap();
    h.time = 0.75;
    h.save(dir.path()).unwrap();
    let back = ProfileHierarchy::load(dir.path()).unwrap();
    assert_eq!(back, h);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["order"], 2);
    assert_eq!(manifest["d"], 3);
    assert_eq!(manifest["epsilon-independent"], true);
    assert_eq!(manifest["fields"]["n_zk"], "n_zk.fld");

    std::fs::remove_file(dir.path().join("n1.fld")).unwrap();
    assert!(ProfileHierarchy::load(dir.path()).is_err());
    let mut m = manifest.clone();
    m["fields"].as_object_mut().unwrap().remove("n1");
    std::fs::write(dir.path().join("manifest.json"), m.to_string()).unwrap();
    assert!(matches!(ProfileHierarchy::load(dir.path()), Err(Error::Format(_))));
}
