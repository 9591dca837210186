use super::build::{canonical, model_for};
use super::jet::Jet;
use super::residual::elim3;
use crate::error::{Error, Result};
use crate::limit::{LinearizedSource, Trajectory};
use crate::spectral::{d, d1_inv, dealiased_product as prod, forward_unchecked, x1_mean, RealField};

fn x1_mean_content(f: &RealField) -> f64 {
    forward_unchecked(f).x1_mean_content()
}

/// Source G of the linearized equation for n2, assembled mechanically: the
/// eps^3 eliminated combination evaluated with n2 = 0 is -2V d1^{-1} G (KP)
/// or -2V G (ZK).
pub fn second_order_source(n1: &RealField, v: f64) -> Result<RealField> {
    let dim = n1.grid().rank();
    let zero = Jet::zero_like(n1);
    let (h, r) = canonical(n1, v, Some(&zero))?;
    let c0 = elim3(&h, &r)?;
    if dim == 3 {
        return Ok(c0 * (-0.5 / v));
    }
    let content = x1_mean_content(&c0);
    let tol = 1e-9 * (1.0 + c0.l2());
    if content > tol {
        return Err(Error::Constraint {
            what: "x1-mean of the eps^3 combination (profile derivation is inconsistent)".into(),
            norm: content,
            tol,
        });
    }
    Ok(d(&c0, 0, 1) * (-0.5 / v))
}

/// Hand-derived closed form of the KP source, with a = d_t n1 and
/// I = d1^{-1}:
/// G = -(1/2V) d1 [ -(2V^2/3) d1(n^3) + V^2 <n^2>_1 d1 n - V^2 d1(n I^2 d2^2 n)
///     + V^2 d2(n w) + (V^2/2) d1(w^2) - V (n a) + (1/2V) d1^2 a + (V/2) I^2 d2^2 a
///     + d1^5 n - (1/2) d1^3 (n^2) + 2 d1 d2^2 n ],  w = I d2 n.
pub fn kp_source_closed_form(n1: &RealField, v: f64) -> Result<RealField> {
    if n1.grid().rank() != 2 {
        return Err(Error::config("the KP source needs a 2D grid"));
    }
    let model = model_for(2, v);
    model.check_constraint(n1, "n1")?;
    let n = n1;
    let a = model.rhs(n);
    let nn = prod(n, n);
    let i2d22 = |f: &RealField| d1_inv(&d1_inv(&d(f, 1, 2)));
    let mut b = d(&prod(n, &nn), 0, 1) * (-2.0 * v * v / 3.0);
    b += &(prod(&x1_mean(&nn), &d(n, 0, 1)) * (v * v));
    b -= &(d(&prod(n, &i2d22(n)), 0, 1) * (v * v));
    let w = d1_inv(&d(n, 1, 1));
    b += &(d(&prod(n, &w), 1, 1) * (v * v));
    b += &(d(&prod(&w, &w), 0, 1) * (0.5 * v * v));
    b -= &(prod(n, &a) * v);
    b += &(d(&a, 0, 2) * (0.5 / v));
    b += &(i2d22(&a) * (0.5 * v));
    b += &d(n, 0, 5);
    b -= &(d(&nn, 0, 3) * 0.5);
    b += &(d(&d(n, 1, 2), 0, 1) * 2.0);
    Ok(d(&b, 0, 1) * (-0.5 / v))
}

fn sources<'a>(n1: &'a Trajectory, v: f64) -> LinearizedSource<'a> {
    LinearizedSource::from_trajectory(n1, move |t| second_order_source(&n1.at(t)?, v))
}

/// Background n1(t) and source G(t) for the second-order KP profile.
pub fn second_order_sources_kp(n1: &Trajectory, v: f64) -> Result<LinearizedSource<'_>> {
    if n1.first().grid().rank() != 2 {
        return Err(Error::config("the KP source needs a 2D trajectory"));
    }
    Ok(sources(n1, v))
}

/// Background n1(t) and source G(t) for the second-order ZK profile.
pub fn second_order_sources_zk(n1: &Trajectory, v: f64) -> Result<LinearizedSource<'_>> {
    if n1.first().grid().rank() != 3 {
        return Err(Error::config("the ZK source needs a 3D trajectory"));
    }
    Ok(sources(n1, v))
}

