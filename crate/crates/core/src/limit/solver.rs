use num_complex::Complex64;

use super::config::{LimitConfig, LimitEquation};
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::etd::{etdrk4_step, EtdCoefficients};
use crate::spectral::{
    forward_unchecked, inverse_transform, sobolev_norm, Grid, RealField, SpectralField,
};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Linear KP-II symbol: i[k1^3/(2V) - (V/2) k2^2/k1], zero on k1 = 0.
pub fn kp2_linear_symbol(k: &[f64], v: f64) -> Complex64 {
    let (k1, k2) = (k[0], k.get(1).copied().unwrap_or(0.0));
    if k1 == 0.0 {
        return ZERO;
    }
    I * (k1.powi(3) / (2.0 * v) - 0.5 * v * k2 * k2 / k1)
}

/// Linear ZK symbol: i[alpha k1^3 + beta k1 |k_perp|^2].
pub fn zk_linear_symbol(k: &[f64], alpha: f64, beta: f64) -> Complex64 {
    let k1 = k[0];
    let kp2: f64 = k.iter().skip(1).map(|x| x * x).sum();
    I * (alpha * k1.powi(3) + beta * k1 * kp2)
}

/// Coefficients and operators of one limit equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitModel {
    pub kp: bool,
    pub v: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c_n: f64,
    pub c_bg: f64,
}

impl LimitModel {
    pub fn from_config(cfg: &LimitConfig) -> LimitModel {
        LimitModel {
            kp: cfg.equation.is_kp(),
            v: cfg.v,
            alpha: cfg.alpha(),
            beta: cfg.beta(),
            c_n: cfg.c_n(),
            c_bg: cfg.c_bg(),
        }
    }

    /// KP-II with default coefficients.
    pub fn kp(v: f64) -> LimitModel {
        LimitModel::from_config(&LimitConfig::new(LimitEquation::Kp2, v, 1.0, 0.0))
    }

    /// ZK with default coefficients.
    pub fn zk(v: f64) -> LimitModel {
        LimitModel::from_config(&LimitConfig::new(LimitEquation::Zk, v, 1.0, 0.0))
    }

    pub fn symbol(&self, k: &[f64; 3], rank: usize) -> Complex64 {
        if self.kp {
            kp2_linear_symbol(&k[..rank], self.v)
        } else {
            zk_linear_symbol(&k[..rank], self.alpha, self.beta)
        }
    }

    /// Modes the solver keeps: no Nyquist, and for KP no k1 = 0 mode except the mean.
    pub fn allowed(&self, grid: &Grid, flat: usize) -> bool {
        if grid.is_nyquist(flat) {
            return false;
        }
        if self.kp {
            let k = grid.kvecs()[flat];
            if k[0] == 0.0 && (k[1] != 0.0 || k[2] != 0.0) {
                return false;
            }
        }
        true
    }

    fn mask_in_place(&self, s: &mut SpectralField) {
        let grid = s.grid().clone();
        for (flat, c) in s.coeffs_mut().iter_mut().enumerate() {
            if !self.allowed(&grid, flat) {
                *c = ZERO;
            }
        }
    }

    /// Norm of the content the constraint forbids (KP only; zero for ZK).
    pub fn constraint_defect(&self, f: &RealField) -> f64 {
        if !self.kp {
            return 0.0;
        }
        let s = forward_unchecked(f);
        let grid = s.grid();
        let sum: f64 = s
            .coeffs()
            .iter()
            .zip(grid.kvecs())
            .filter(|(_, k)| k[0] == 0.0 && (k[1] != 0.0 || k[2] != 0.0))
            .map(|(c, _)| c.norm_sqr())
            .sum();
        (sum * grid.volume()).sqrt()
    }

    pub fn check_constraint(&self, f: &RealField, what: &str) -> Result<()> {
        let defect = self.constraint_defect(f);
        let tol = 1e-10 * f.l2();
        if defect > tol {
            return Err(Error::Constraint {
                what: format!("{what} has nonzero x1-mean content"),
                norm: defect,
                tol,
            });
        }
        Ok(())
    }

    /// Linear part L f (KP: -(1/2V) d1^3 f - (V/2) d1^{-1} d2^2 f).
    pub fn linear(&self, f: &RealField) -> RealField {
        let rank = f.grid().rank();
        let mut s = forward_unchecked(f);
        s.apply_symbol(|k| self.symbol(k, rank));
        self.mask_in_place(&mut s);
        inverse_transform(&s)
    }

    /// -c d1 P(a b) in spectral form, masked.
    fn transport_hat(&self, a: &RealField, b: &RealField, c: f64) -> SpectralField {
        let mut s = forward_unchecked(&(a * b));
        s.dealias_in_place();
        s.differentiate(0, 1);
        s.coeffs_mut().iter_mut().for_each(|v| *v *= -c);
        self.mask_in_place(&mut s);
        s
    }

    /// Full right-hand side of the nonlinear equation.
    pub fn rhs(&self, f: &RealField) -> RealField {
        let mut s = self.transport_hat(f, f, 0.5 * self.c_n);
        let lin = forward_unchecked(&self.linear(f));
        for (a, b) in s.coeffs_mut().iter_mut().zip(lin.coeffs()) {
            *a += b;
        }
        inverse_transform(&s)
    }

    /// Derivative of the nonlinear right-hand side at f in the direction m.
    pub fn tangent(&self, f: &RealField, m: &RealField) -> RealField {
        let mut s = self.transport_hat(f, m, self.c_n);
        let lin = forward_unchecked(&self.linear(m));
        for (a, b) in s.coeffs_mut().iter_mut().zip(lin.coeffs()) {
            *a += b;
        }
        inverse_transform(&s)
    }

    /// Right-hand side of the linearized equation with background n1 and an
    /// already-integrated forcing F (KP: F = d1^{-1} G).
    pub fn linearized_rhs(&self, background: &RealField, f: &RealField, forcing: Option<&RealField>) -> RealField {
        let mut s = self.transport_hat(background, f, self.c_bg);
        let lin = forward_unchecked(&self.linear(f));
        for (a, b) in s.coeffs_mut().iter_mut().zip(lin.coeffs()) {
            *a += b;
        }
        let mut out = inverse_transform(&s);
        if let Some(g) = forcing {
            out += g;
        }
        out
    }

    /// Converts a source G to the evolution forcing: d1^{-1} G for KP, G for ZK.
    pub fn integrate_source(&self, g: &RealField) -> Result<RealField> {
        if !self.kp {
            return Ok(g.clone());
        }
        let s = forward_unchecked(g);
        let content = s.x1_mean_content();
        let tol = 1e-10 * g.l2();
        if content > tol {
            return Err(Error::Constraint {
                what: "source has nonzero k1 = 0 content".into(),
                norm: content,
                tol,
            });
        }
        let mut s = crate::spectral::integrate_x1(s);
        self.mask_in_place(&mut s);
        Ok(inverse_transform(&s))
    }
}

/// Background n1(t) and source G(t) of a linearized equation.
pub struct LinearizedSource<'a> {
    background: Box<dyn Fn(f64) -> Result<RealField> + Send + Sync + 'a>,
    forcing: Box<dyn Fn(f64) -> Result<Option<RealField>> + Send + Sync + 'a>,
}

impl<'a> LinearizedSource<'a> {
    pub fn new(
        background: impl Fn(f64) -> Result<RealField> + Send + Sync + 'a,
        forcing: impl Fn(f64) -> Result<RealField> + Send + Sync + 'a,
    ) -> LinearizedSource<'a> {
        LinearizedSource {
            background: Box::new(background),
            forcing: Box::new(move |t| forcing(t).map(Some)),
        }
    }

    /// G = 0.
    pub fn homogeneous(background: impl Fn(f64) -> Result<RealField> + Send + Sync + 'a) -> LinearizedSource<'a> {
        LinearizedSource {
            background: Box::new(background),
            forcing: Box::new(|_| Ok(None)),
        }
    }

    /// Background interpolated from a stored trajectory.
    pub fn from_trajectory(
        n1: &'a Trajectory,
        forcing: impl Fn(f64) -> Result<RealField> + Send + Sync + 'a,
    ) -> LinearizedSource<'a> {
        LinearizedSource::new(move |t| n1.at(t), forcing)
    }

    pub fn background(&self, t: f64) -> Result<RealField> {
        (self.background)(t)
    }

    pub fn forcing(&self, t: f64) -> Result<Option<RealField>> {
        (self.forcing)(t)
    }
}

fn masked_initial(model: &LimitModel, n0: &RealField) -> Vec<Complex64> {
    let mut s = forward_unchecked(n0);
    model.mask_in_place(&mut s);
    s.into_coeffs()
}

fn integrate(
    n0: &RealField,
    cfg: &LimitConfig,
    source: Option<&LinearizedSource<'_>>,
) -> Result<Trajectory> {
    cfg.validate()?;
    let model = LimitModel::from_config(cfg);
    let grid = n0.grid().clone();
    if !n0.is_finite() {
        return Err(Error::Numerical("initial data is not finite".into()));
    }
    model.check_constraint(n0, "initial data")?;
    let rank = grid.rank();
    let rates: Vec<Complex64> = grid.kvecs().iter().map(|k| model.symbol(k, rank)).collect();
    let (steps, h) = cfg.steps();
    let coeffs = EtdCoefficients::new(&rates, h);

    let to_real = |c: &[Complex64]| inverse_transform(&SpectralField::new(&grid, c.to_vec()).expect("sized"));
    let mut u = masked_initial(&model, n0);
    let mut times = vec![0.0];
    let mut snaps = vec![to_real(&u)];
    let base = sobolev_norm(&snaps[0], 2);
    let limit = 10.0 * base;

    let nonlinear = |z: &[Complex64], t: f64| -> Result<Vec<Complex64>> {
        let f = to_real(z);
        let mut s = match source {
            None => model.transport_hat(&f, &f, 0.5 * model.c_n),
            Some(src) => {
                let bg = src.background(t)?;
                let mut s = model.transport_hat(&bg, &f, model.c_bg);
                if let Some(g) = src.forcing(t)? {
                    let forcing = forward_unchecked(&model.integrate_source(&g)?);
                    for (a, b) in s.coeffs_mut().iter_mut().zip(forcing.coeffs()) {
                        *a += b;
                    }
                }
                s
            }
        };
        model.mask_in_place(&mut s);
        Ok(s.into_coeffs())
    };

    for step in 0..steps {
        let t = step as f64 * h;
        u = etdrk4_step(&coeffs, &u, t, nonlinear)?;
        let keep = (step + 1) % cfg.snapshot_every == 0 || step + 1 == steps;
        let check_blowup = source.is_none();
        if keep || check_blowup {
            let f = to_real(&u);
            if !f.is_finite() {
                return Err(Error::Numerical(format!("non-finite solution at t = {}", t + h)));
            }
            if check_blowup {
                let norm = sobolev_norm(&f, 2);
                if norm > limit && norm > 1e-12 {
                    return Err(Error::BlowUp {
                        time: t + h,
                        norm,
                        limit,
                    });
                }
            }
            if keep {
                times.push(if step + 1 == steps { cfg.t_final } else { t + h });
                snaps.push(f);
            }
        }
    }
    Trajectory::new(times, snaps)
}

fn expect_equation(cfg: &LimitConfig, allowed: LimitEquation) -> Result<()> {
    if cfg.equation != allowed {
        return Err(Error::config(format!(
            "configuration is for '{}' but the '{allowed}' solver was called",
            cfg.equation
        )));
    }
    Ok(())
}

pub fn solve_kp2(n0: &RealField, cfg: &LimitConfig) -> Result<Trajectory> {
    expect_equation(cfg, LimitEquation::Kp2)?;
    if n0.grid().rank() != 2 {
        return Err(Error::config("KP-II needs a rank-2 grid"));
    }
    integrate(n0, cfg, None)
}

/// ZK on a rank-3 grid; rank 1 gives the KdV reduction.
pub fn solve_zk(n0: &RealField, cfg: &LimitConfig) -> Result<Trajectory> {
    expect_equation(cfg, LimitEquation::Zk)?;
    integrate(n0, cfg, None)
}

pub fn solve_linearized_kp(source: &LinearizedSource<'_>, nk0: &RealField, cfg: &LimitConfig) -> Result<Trajectory> {
    expect_equation(cfg, LimitEquation::LinKp)?;
    if nk0.grid().rank() != 2 {
        return Err(Error::config("linearized KP needs a rank-2 grid"));
    }
    integrate(nk0, cfg, Some(source))
}

pub fn solve_linearized_zk(source: &LinearizedSource<'_>, nk0: &RealField, cfg: &LimitConfig) -> Result<Trajectory> {
    expect_equation(cfg, LimitEquation::LinZk)?;
    integrate(nk0, cfg, Some(source))
}
