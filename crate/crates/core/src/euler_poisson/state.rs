use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poisson::{
    solve_poisson_detailed, DEFAULT_MAX_NEWTON, DEFAULT_POISSON_TOL,
};
use super::symbol::sound_speed_sq;
use crate::error::{Error, Result};
use crate::spectral::{forward_unchecked, inverse_transform, Grid, RealField, ScalingParams, SpectralField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Abort threshold for the density.
pub const POSITIVITY_FLOOR: f64 = 0.1;

/// Full Euler-Poisson state in the moving frame.
#[derive(Clone, Debug)]
pub struct EPState {
    pub n: RealField,
    pub u: Vec<RealField>,
    pub phi: RealField,
    pub time: f64,
    pub params: ScalingParams,
}

impl EPState {
    /// Builds a state and solves for a consistent potential.
    pub fn new(n: RealField, u: Vec<RealField>, params: ScalingParams, time: f64) -> Result<EPState> {
        let grid = n.grid().clone();
        if grid.rank() != params.dim() {
            return Err(Error::config(format!(
                "grid rank {} does not match dimension {}",
                grid.rank(),
                params.dim()
            )));
        }
        if u.len() != params.dim() {
            return Err(Error::config(format!(
                "expected {} velocity components, got {}",
                params.dim(),
                u.len()
            )));
        }
        if u.iter().any(|c| c.grid() != &grid) {
            return Err(Error::config("velocity components live on a different grid"));
        }
        let min_n = n.min();
        if min_n <= POSITIVITY_FLOOR {
            return Err(Error::Positivity { min_n, time });
        }
        let phi = solve_poisson_detailed(&n, &params, DEFAULT_POISSON_TOL, DEFAULT_MAX_NEWTON, None)?.phi;
        Ok(EPState {
            n,
            u,
            phi,
            time,
            params,
        })
    }

    /// (n, u, phi) = (1, 0, 0).
    pub fn uniform(grid: &Grid, params: ScalingParams) -> Result<EPState> {
        if grid.rank() != params.dim() {
            return Err(Error::config(format!(
                "grid rank {} does not match dimension {}",
                grid.rank(),
                params.dim()
            )));
        }
        Ok(EPState {
            n: RealField::constant(grid, 1.0),
            u: vec![RealField::zeros(grid); params.dim()],
            phi: RealField::zeros(grid),
            time: 0.0,
            params,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.n.grid()
    }

    /// Integral of n - 1.
    pub fn mass(&self) -> f64 {
        (self.n.mean() - 1.0) * self.grid().volume()
    }

    pub(crate) fn to_spectral(&self) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(self.u.len() + 1);
        let nt = self.n.map(|v| v - 1.0);
        out.push(forward_unchecked(&nt).into_coeffs());
        for c in &self.u {
            out.push(forward_unchecked(c).into_coeffs());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperConfig {
    pub dt: f64,
    #[serde(default = "default_tol")]
    pub poisson_tol: f64,
    #[serde(default = "default_newton")]
    pub max_newton: usize,
    #[serde(default = "default_cfl")]
    pub c_cfl: f64,
    /// Coefficient of a -nu|k|^4 damping added to every mode.
    #[serde(default)]
    pub hyperviscosity: Option<f64>,
    /// Switch damping on when the initial spectral tail is not negligible.
    #[serde(default)]
    pub auto_hyperviscosity: bool,
}

fn default_tol() -> f64 {
    DEFAULT_POISSON_TOL
}
fn default_newton() -> usize {
    DEFAULT_MAX_NEWTON
}
fn default_cfl() -> f64 {
    0.5
}

impl StepperConfig {
    pub fn new(dt: f64) -> StepperConfig {
        StepperConfig {
            dt,
            poisson_tol: DEFAULT_POISSON_TOL,
            max_newton: DEFAULT_MAX_NEWTON,
            c_cfl: default_cfl(),
            hyperviscosity: None,
            auto_hyperviscosity: false,
        }
    }

    /// Largest step allowed on `grid` at this epsilon.
    pub fn dt_max(&self, grid: &Grid, p: &ScalingParams) -> f64 {
        self.c_cfl * p.epsilon() * grid.min_spacing()
    }

    pub fn validate(&self, grid: &Grid, p: &ScalingParams) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config(format!("dt {} must be positive", self.dt)));
        }
        if !(self.poisson_tol > 0.0 && self.poisson_tol <= 1e-6) {
            return Err(Error::config(format!(
                "poisson_tol {} must lie in (0, 1e-6]",
                self.poisson_tol
            )));
        }
        if self.max_newton < 3 {
            return Err(Error::config("max_newton must be at least 3"));
        }
        if let Some(nu) = self.hyperviscosity {
            if !(nu >= 0.0) {
                return Err(Error::config("hyperviscosity must be nonnegative"));
            }
        }
        let dt_max = self.dt_max(grid, p);
        // small slack so dt = dt_max computed elsewhere passes
        if self.dt > dt_max * (1.0 + 1e-12) {
            return Err(Error::config(format!(
                "dt {} exceeds the stability bound {dt_max:.6e} = c_cfl * eps * min spacing",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Time derivatives of n and u.
#[derive(Clone, Debug)]
pub struct Tendency {
    pub dn: RealField,
    pub du: Vec<RealField>,
}

fn grad_bar(s: &[Complex64], grid: &Grid, p: &ScalingParams, axis: usize) -> RealField {
    let mut out = SpectralField::new(grid, s.to_vec()).expect("sized by grid");
    out.differentiate(axis, 1);
    if p.dim() == 2 && axis == 1 {
        let w = p.epsilon().sqrt();
        out.coeffs_mut().iter_mut().for_each(|c| *c *= w);
    }
    inverse_transform(&out)
}

fn fft_dealiased(f: &RealField) -> Vec<Complex64> {
    let mut s = forward_unchecked(f);
    s.dealias_in_place();
    s.into_coeffs()
}

/// Nonlinear remainder N = f - (1/eps) L w, in spectral form, given a
/// potential consistent with the state. Also returns min n.
pub(crate) fn nonlinear_part(
    grid: &Grid,
    p: &ScalingParams,
    w: &[Vec<Complex64>],
    phi: &RealField,
) -> Vec<Vec<Complex64>> {
    let d = p.dim();
    let eps = p.epsilon();
    let ti = p.ion_temperature();
    let to_real = |s: &[Complex64]| {
        inverse_transform(&SpectralField::new(grid, s.to_vec()).expect("sized by grid"))
    };
    let nt = to_real(&w[0]);
    let u: Vec<RealField> = (1..=d).map(|c| to_real(&w[c])).collect();

    let mut out = Vec::with_capacity(d + 1);

    // continuity: -(1/eps) div_bar(n~ u)
    let mut dn = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..d {
        let flux = &nt * &u[i];
        let mut f = SpectralField::new(grid, fft_dealiased(&flux)).expect("sized");
        f.differentiate(i, 1);
        let w_i = if d == 2 && i == 1 { eps.sqrt() } else { 1.0 };
        for (a, b) in dn.iter_mut().zip(f.coeffs()) {
            *a -= b * (w_i / eps);
        }
    }
    out.push(dn);

    // potential beyond its linear response, kept in band
    let mut dphi = forward_unchecked(phi).into_coeffs();
    for ((dp, k), n_hat) in dphi.iter_mut().zip(grid.kvecs()).zip(&w[0]) {
        *dp -= n_hat / (1.0 + eps * p.kbar_sq(k));
    }
    let mut dphi = SpectralField::new(grid, dphi).expect("sized");
    dphi.dealias_in_place();

    let grad_nt: Vec<RealField> = (0..d).map(|i| grad_bar(&w[0], grid, p, i)).collect();
    // -T_i * n~ / n, the pressure factor beyond linear order
    let pressure = nt.map(|v| -ti * v / (1.0 + v));
    for c in 0..d {
        let mut g = RealField::zeros(grid);
        for i in 0..d {
            let du = grad_bar(&w[c + 1], grid, p, i);
            g = g + &u[i] * &du;
        }
        g = g + &pressure * &grad_nt[c];
        let g_hat = fft_dealiased(&g);
        let mut dp = dphi.derivative(c, 1);
        if d == 2 && c == 1 {
            let s = eps.sqrt();
            dp.coeffs_mut().iter_mut().for_each(|v| *v *= s);
        }
        let comp: Vec<Complex64> = g_hat
            .iter()
            .zip(dp.coeffs())
            .map(|(a, b)| -(a + b) / eps)
            .collect();
        out.push(comp);
    }
    out
}

/// (1/eps) L(k) w applied mode by mode.
pub(crate) fn linear_part(grid: &Grid, p: &ScalingParams, w: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let d = p.dim();
    let eps = p.epsilon();
    let v = p.wave_speed();
    let g = p.b() / eps.sqrt();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; d + 1];
    for (m, k) in grid.kvecs().iter().enumerate() {
        let kb = p.kbar(k);
        let c2 = sound_speed_sq(k, p);
        let adv = I * (v * k[0]);
        let mut acc = adv * w[0][m];
        for j in 0..d {
            acc -= I * kb[j] * w[j + 1][m];
        }
        out[0][m] = acc / eps;
        for j in 0..d {
            let mut a = adv * w[j + 1][m] - I * (c2 * kb[j]) * w[0][m];
            if p.magnetic() {
                if j == 1 {
                    a += g * w[3][m];
                } else if j == 2 {
                    a -= g * w[2][m];
                }
            }
            out[j + 1][m] = a / eps;
        }
    }
    out
}

/// Full right-hand side of the rescaled system divided by eps, products dealiased.
pub fn ep_rhs(state: &EPState) -> Result<Tendency> {
    let min_n = state.n.min();
    if min_n <= POSITIVITY_FLOOR {
        return Err(Error::Positivity {
            min_n,
            time: state.time,
        });
    }
    let grid = state.grid();
    let p = &state.params;
    let w = state.to_spectral();
    let lin = linear_part(grid, p, &w);
    let nl = nonlinear_part(grid, p, &w, &state.phi);
    let mut fields = lin.into_iter().zip(nl).map(|(a, b)| {
        let s: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        inverse_transform(&SpectralField::new(grid, s).expect("sized"))
    });
    let dn = fields.next().expect("density row");
    Ok(Tendency {
        dn,
        du: fields.collect(),
    })
}
