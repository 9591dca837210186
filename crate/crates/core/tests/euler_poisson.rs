use std::f64::consts::PI;

use disperlim_core::euler_poisson::{
    decompose_mode, ep_rhs, linearized_symbol, poisson_residual, run_ep, solve_poisson,
    solve_poisson_detailed, step_ep, EPState, StepperConfig,
};
use disperlim_core::spectral::{forward_transform, inverse_transform, Grid, RealField, ScalingParams, SpectralField};
use disperlim_core::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn torus(dims: &[usize]) -> Grid {
    Grid::new(dims, &vec![2.0 * PI; dims.len()]).unwrap()
}

#[test]
fn poisson_uniform_and_exponential_states() {
    let g = torus(&[16, 16]);
    let p = ScalingParams::new(0.1, 1.0, 2).unwrap();
    let phi = solve_poisson(&RealField::constant(&g, 1.0), &p, 1e-11, None).unwrap();
    assert!(phi.max_abs() < 1e-15);
    let c: f64 = 0.3;
    let phi = solve_poisson(&RealField::constant(&g, c.exp()), &p, 1e-11, None).unwrap();
    assert!((&phi - &RealField::constant(&g, c)).max_abs() < 1e-14);
}

#[test]
fn poisson_newton_converges_quadratically() {
    let g = torus(&[128, 128]);
    let p = ScalingParams::new(0.1, 1.0, 2).unwrap();
    let n = RealField::from_fn(&g, |x| 1.0 + 0.1 * x[0].sin());
    let sol = solve_poisson_detailed(&n, &p, 1e-11, 25, None).unwrap();
    assert!(sol.iterations <= 8, "iterations {}", sol.iterations);
    assert!(*sol.residuals.last().unwrap() <= 1e-11);
    assert!(poisson_residual(&n, &sol.phi, &p) <= 1e-11);
    let k = sol.quadratic_constant();
    assert!(k.map_or(true, f64::is_finite));
}

#[test]
fn poisson_linear_response() {
    let g = torus(&[32, 32]);
    let eps = 0.1;
    let p = ScalingParams::new(eps, 1.0, 2).unwrap();
    let a = 1e-6;
    let n = RealField::from_fn(&g, |x| 1.0 + a * (2.0 * x[0] + 3.0 * x[1]).sin());
    let phi = solve_poisson(&n, &p, 1e-11, None).unwrap();
    let nh = forward_transform(&n).unwrap();
    let ph = forward_transform(&phi).unwrap();
    let kbar2 = 4.0 + eps * 9.0;
    let expect = nh.mode(&[2, 3]) / (1.0 + eps * kbar2);
    let got = ph.mode(&[2, 3]);
    assert!((got - expect).norm() <= 1e-6 * expect.norm(), "{got} vs {expect}");
}

#[test]
fn poisson_errors() {
    let g = torus(&[16, 16]);
    let p = ScalingParams::new(0.1, 1.0, 2).unwrap();
    let bad = RealField::from_fn(&g, |x| x[0].sin());
    assert!(matches!(solve_poisson(&bad, &p, 1e-11, None), Err(Error::Domain(_))));
    let n = RealField::from_fn(&g, |x| 1.0 + 0.5 * x[0].sin());
    assert!(matches!(
        solve_poisson_detailed(&n, &p, 1e-11, 1, None),
        Err(Error::Convergence { iterations: 1, .. })
    ));
}

#[test]
fn symbol_at_zero_wavenumber() {
    let p = ScalingParams::new(0.1, 1.0, 2).unwrap();
    let l = linearized_symbol(&[0.0; 3], &p);
    assert!(l.iter().all(|c| c.norm() == 0.0));
}

#[test]
fn symbol_acoustic_branch_2d() {
    let eps = 0.2;
    let p = ScalingParams::new(eps, 0.0, 2).unwrap();
    let k1 = 1.7;
    let l = linearized_symbol(&[k1, 0.0, 0.0], &p);
    // L = i M with M real
    let m = DMatrix::from_fn(3, 3, |r, c| l[(r, c)].im);
    assert!(l.iter().all(|c| c.re == 0.0));
    let mut ev: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.re / k1).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let c = (1.0 / (1.0 + eps * k1 * k1)).sqrt();
    let v = p.wave_speed();
    let expect = [v - c, v, v + c];
    for (a, b) in ev.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12, "{ev:?}");
    }
}

#[test]
fn symbol_gyration_3d() {
    let eps = 0.05;
    let p = ScalingParams::new(eps, 1.0, 3).unwrap();
    let l = linearized_symbol(&[0.0; 3], &p);
    let block = DMatrix::from_fn(2, 2, |r, c| l[(r + 2, c + 2)].re);
    let ev = block.complex_eigenvalues();
    for z in ev.iter() {
        assert!(z.re.abs() < 1e-14);
        assert!((z.im.abs() - 1.0 / eps.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn mode_decomposition_reconstructs_symbol() {
    for (dim, eps, ti) in [(2, 0.1, 1.0), (3, 0.05, 0.0), (3, 0.3, 3.0)] {
        let p = ScalingParams::new(eps, ti, dim).unwrap();
        for k in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.5], [-3.0, 0.0, 2.0], [0.0, 4.0, 1.0]] {
            let mut k = k;
            if dim == 2 {
                k[2] = 0.0;
            }
            let l = linearized_symbol(&k, &p);
            let dec = decompose_mode(&k, &p);
            let m = dim + 1;
            let t = DMatrix::from_row_slice(m, m, &dec.t);
            let ti_ = DMatrix::from_row_slice(m, m, &dec.t_inv);
            let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                m,
                dec.lambda.iter().map(|&x| Complex64::new(0.0, x)),
            ));
            let rec = &t * lam * &ti_;
            assert!((&rec - &l).norm() < 1e-12 * (1.0 + l.norm()), "k={k:?}");
            assert!((&t * &ti_ - DMatrix::<Complex64>::identity(m, m)).norm() < 1e-12);
        }
    }
}

#[test]
fn rhs_vanishes_at_uniform_state() {
    for dim in [2, 3] {
        let g = torus(&vec![16; dim]);
        let p = ScalingParams::new(0.1, 1.0, dim).unwrap();
        let s = EPState::uniform(&g, p).unwrap();
        let t = ep_rhs(&s).unwrap();
        assert_eq!(t.dn.max_abs(), 0.0);
        assert!(t.du.iter().all(|c| c.max_abs() == 0.0));
    }
}

#[test]
fn cold_ions_feel_only_the_potential() {
    // amplitude small enough that the potential is resolved inside the 2/3 band
    let g = torus(&[64, 64]);
    let eps = 0.2;
    let p = ScalingParams::new(eps, 0.0, 2).unwrap();
    let n = RealField::from_fn(&g, |x| 1.0 + 0.02 * (x[0] + 2.0 * x[1]).cos());
    let s = EPState::new(n, vec![RealField::zeros(&g); 2], p, 0.0).unwrap();
    let t = ep_rhs(&s).unwrap();
    let grad = disperlim_core::spectral::weighted_gradient(&s.phi, &p).unwrap();
    for c in 0..2 {
        let expect = &grad[c] * (-1.0 / eps);
        assert!((&t.du[c] - &expect).max_abs() < 1e-11);
    }
}

fn single_mode_state(g: &Grid, p: ScalingParams, a: f64) -> EPState {
    let dim = p.dim();
    let phase = |x: &[f64; 3]| x[0] + x[1] + if dim == 3 { x[2] } else { 0.0 };
    let n = RealField::from_fn(g, |x| 1.0 + a * phase(x).cos());
    let u: Vec<RealField> = (0..dim)
        .map(|c| RealField::from_fn(g, |x| a * (0.3 + 0.2 * c as f64) * (phase(x) + c as f64).sin()))
        .collect();
    EPState::new(n, u, p, 0.0).unwrap()
}

fn spectral_components(s: &EPState) -> Vec<SpectralField> {
    let mut v = vec![forward_transform(&s.n.map(|x| x - 1.0)).unwrap()];
    v.extend(s.u.iter().map(|c| forward_transform(c).unwrap()));
    v
}

#[test]
fn rhs_matches_linear_symbol_at_small_amplitude() {
    for dim in [2, 3] {
        let g = torus(&vec![16; dim]);
        let eps = 0.1;
        let p = ScalingParams::new(eps, 1.0, dim).unwrap();
        let a = 1e-6;
        let s = single_mode_state(&g, p, a);
        let t = ep_rhs(&s).unwrap();
        let w = spectral_components(&s);
        let mut tend = vec![forward_transform(&t.dn).unwrap()];
        tend.extend(t.du.iter().map(|c| forward_transform(c).unwrap()));
        for sign in [1i64, -1] {
            let m = [sign, sign, if dim == 3 { sign } else { 0 }];
            let k = [sign as f64, sign as f64, if dim == 3 { sign as f64 } else { 0.0 }];
            let l = linearized_symbol(&k, &p);
            for r in 0..=dim {
                let mut lw = Complex64::new(0.0, 0.0);
                for c in 0..=dim {
                    lw += l[(r, c)] * w[c].mode(&m);
                }
                let got = tend[r].mode(&m);
                assert!((got - lw / eps).norm() < 1e-9, "dim {dim} row {r}: {got} vs {}", lw / eps);
            }
        }
    }
}

#[test]
fn steady_state_is_preserved() {
    for dim in [2, 3] {
        let g = torus(&vec![16; dim]);
        for eps in [0.01, 0.5] {
            let p = ScalingParams::new(eps, 1.0, dim).unwrap();
            let cfg = StepperConfig::new(0.5 * eps * g.min_spacing());
            let s0 = EPState::uniform(&g, p).unwrap();
            let mut s = s0.clone();
            for _ in 0..100 {
                s = step_ep(&s, &cfg).unwrap();
            }
            assert!((&s.n - &s0.n).max_abs() <= 1e-12);
            assert!(s.u.iter().all(|c| c.max_abs() <= 1e-12));
            assert!(s.phi.max_abs() <= 1e-12);
        }
    }
}

#[test]
fn cfl_violation_is_a_config_error() {
    let g = torus(&[16, 16]);
    let p = ScalingParams::new(0.1, 1.0, 2).unwrap();
    let s = EPState::uniform(&g, p).unwrap();
    let cfg = StepperConfig::new(0.1);
    assert!(matches!(step_ep(&s, &cfg), Err(Error::Config(_))));
}

#[test]
fn positivity_floor() {
    let g = torus(&[16, 16]);
    let p = ScalingParams::new(0.1, 1.0, 2).unwrap();
    let n = RealField::from_fn(&g, |x| 1.0 + 0.95 * x[0].sin());
    let r = EPState::new(n, vec![RealField::zeros(&g); 2], p, 0.0);
    assert!(matches!(r, Err(Error::Positivity { .. })));
}

#[test]
fn zero_time_run_returns_initial_state() {
    let g = torus(&[16, 16]);
    let p = ScalingParams::new(0.1, 1.0, 2).unwrap();
    let s = single_mode_state(&g, p, 1e-3);
    let (out, log) = run_ep(&s, 0.0, &StepperConfig::new(0.01)).unwrap();
    assert_eq!(out.n, s.n);
    assert_eq!(out.time, 0.0);
    assert_eq!(log.steps, 0);
}

#[test]
fn nonlinear_run_conserves_mass_and_poisson_consistency() {
    let g = Grid::new(&[32, 32], &[20.0, 20.0]).unwrap();
    let eps = 0.1;
    let p = ScalingParams::new(eps, 1.0, 2).unwrap();
    let n = RealField::from_fn(&g, |x| {
        1.0 + 0.1 * (-((x[0] - 10.0).powi(2) + (x[1] - 10.0).powi(2)) / 8.0).exp()
    });
    let u = vec![n.map(|v| 1.3 * (v - 1.0)), RealField::zeros(&g)];
    let s0 = EPState::new(n, u, p, 0.0).unwrap();
    let cfg = StepperConfig::new(0.5 * eps * g.min_spacing());
    let (s, log) = run_ep(&s0, 0.3, &cfg).unwrap();
    assert!((s.time - 0.3).abs() < 1e-15);
    assert!((s.mass() - s0.mass()).abs() <= 1e-10 * g.volume());
    assert!(poisson_residual(&s.n, &s.phi, &p) <= 1e-11);
    assert_eq!(log.entries.len(), 2);
    assert!(log.entries.iter().all(|e| e.poisson_residual <= 1e-11));
}

/// Exact evolution of the +-k modes under exp(L T / eps).
fn linear_prediction(s0: &EPState, t: f64) -> Vec<RealField> {
    let p = s0.params;
    let dim = p.dim();
    let g = s0.grid().clone();
    let w = spectral_components(s0);
    let mut out = vec![SpectralField::zeros(&g); dim + 1];
    for sign in [1i64, -1] {
        let m = [sign, sign, if dim == 3 { sign } else { 0 }];
        let k = [m[0] as f64, m[1] as f64, m[2] as f64];
        let prop = (linearized_symbol(&k, &p) * Complex64::new(t / p.epsilon(), 0.0)).exp();
        let pos = g.mode_position(&m[..dim]);
        for r in 0..=dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..=dim {
                acc += prop[(r, c)] * w[c].mode(&m);
            }
            out[r].coeffs_mut()[pos] = acc;
        }
    }
    out.iter().map(inverse_transform).collect()
}

#[test]
fn linear_fidelity_over_unit_time() {
    for dim in [2, 3] {
        for eps in [0.05, 0.2] {
            let g = torus(&vec![16; dim]);
            let p = ScalingParams::new(eps, 1.0, dim).unwrap();
            let s0 = single_mode_state(&g, p, 1e-6);
            let cfg = StepperConfig::new(0.5 * eps * g.min_spacing());
            let (s, _) = run_ep(&s0, 1.0, &cfg).unwrap();
            let pred = linear_prediction(&s0, 1.0);
            let err_n = (&s.n.map(|v| v - 1.0) - &pred[0]).max_abs();
            let err_u = (0..dim)
                .map(|c| (&s.u[c] - &pred[c + 1]).max_abs())
                .fold(0.0, f64::max);
            assert!(err_n <= 1e-8 && err_u <= 1e-8, "dim {dim} eps {eps}: {err_n:e} {err_u:e}");
        }
    }
}
