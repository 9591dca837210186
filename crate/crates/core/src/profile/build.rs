use std::collections::BTreeMap;

use super::hierarchy::ProfileHierarchy;
use super::jet::Jet;
use crate::error::{Error, Result};
use crate::limit::LimitModel;
use crate::spectral::RealField;

/// Time derivatives of the profiles, taken from the limit equations.
#[derive(Clone, Debug)]
pub(crate) struct Rates {
    pub n1: RealField,
    pub u1_1: RealField,
    pub u2_1: RealField,
    pub u3_1: Option<RealField>,
    pub n2: Option<RealField>,
    pub u1_2: Option<RealField>,
}

pub(crate) fn model_for(dim: usize, v: f64) -> LimitModel {
    if dim == 2 {
        LimitModel::kp(v)
    } else {
        LimitModel::zk(v)
    }
}

fn check_dim(n1: &RealField, v: f64) -> Result<usize> {
    let dim = n1.grid().rank();
    if dim != 2 && dim != 3 {
        return Err(Error::config(format!("profiles need a 2D or 3D grid, got rank {dim}")));
    }
    if !(v >= 1.0) || !v.is_finite() {
        return Err(Error::config(format!("wave speed V = {v} must be at least 1")));
    }
    if !n1.is_finite() {
        return Err(Error::Numerical("n1 is not finite".into()));
    }
    Ok(dim)
}

/// Hierarchy and rates from n1 and (for order 2) the jet of n2.
pub(crate) fn canonical(n1: &RealField, v: f64, n2: Option<&Jet>) -> Result<(ProfileHierarchy, Rates)> {
    let dim = check_dim(n1, v)?;
    let model = model_for(dim, v);
    let ti = v * v - 1.0;
    if dim == 2 {
        model.check_constraint(n1, "n1")?;
    }
    let n1_dot = model.rhs(n1);
    let n1j = Jet::new(n1.clone(), Some(n1_dot.clone()));
    let p1 = n1j.clone();
    let u11 = n1j.scale(v);
    let mut aux = BTreeMap::new();
    let dot = |j: &Jet| j.dot.clone().expect("rate available");

    if dim == 2 {
        let u21 = n1j.d(1, 1).d1_inv().scale(v);
        let mut h = ProfileHierarchy {
            order: 1,
            dim,
            v,
            time: 0.0,
            n1: n1.clone(),
            u1_1: u11.value.clone(),
            u2_1: u21.value.clone(),
            u3_1: None,
            phi1: p1.value.clone(),
            n2: None,
            u1_2: None,
            u2_2: None,
            u3_2: None,
            phi2: None,
            aux: BTreeMap::new(),
        };
        let mut rates = Rates {
            n1: n1_dot.clone(),
            u1_1: dot(&u11),
            u2_1: dot(&u21),
            u3_1: None,
            n2: None,
            u1_2: None,
        };
        if let Some(n2j) = n2 {
            let n1_ddot = model.tangent(n1, &n1_dot);
            let nd = Jet::new(n1_dot.clone(), Some(n1_ddot));
            let ubar = nd
                .scale(-1.0)
                .sub(&n1j.mul(&n1j).d(0, 1).scale(v))
                .sub(&u21.d(1, 1))
                .d1_inv();
            let u12 = n2j.scale(v).add(&ubar);
            let phibar = p1.d(0, 2).sub(&p1.mul(&p1).scale(0.5));
            let phi2 = n2j.add(&phibar);
            let u21_dot = Jet::new(dot(&u21), None);
            let u22 = u21_dot
                .add(&u11.mul(&u21.d(0, 1)))
                .add(&n2j.d(1, 1).sub(&n1j.mul(&n1j.d(1, 1))).scale(ti))
                .add(&phi2.d(1, 1))
                .d1_inv()
                .scale(1.0 / v)
                .sub(&n1j.mul(&u21).x1_mean());
            aux.insert("u1_kp".to_string(), ubar.value.clone());
            aux.insert("phi_kp".to_string(), phibar.value);
            h.order = 2;
            h.n2 = Some(n2j.value.clone());
            h.u1_2 = Some(u12.value.clone());
            h.u2_2 = Some(u22.value);
            h.phi2 = Some(phi2.value);
            rates.n2 = n2j.dot.clone();
            rates.u1_2 = u12.dot;
        }
        h.aux = aux;
        return Ok((h, rates));
    }

    let u2_1 = n1j.d(2, 1).scale(-v * v);
    let u3_1 = n1j.d(1, 1).scale(v * v);
    let u2_2 = u3_1.d(0, 1).scale(v);
    let u3_2 = u2_1.d(0, 1).scale(-v);
    let mut h = ProfileHierarchy {
        order: 1,
        dim,
        v,
        time: 0.0,
        n1: n1.clone(),
        u1_1: u11.value.clone(),
        u2_1: u2_1.value.clone(),
        u3_1: Some(u3_1.value.clone()),
        phi1: p1.value.clone(),
        n2: None,
        u1_2: None,
        u2_2: Some(u2_2.value.clone()),
        u3_2: Some(u3_2.value.clone()),
        phi2: None,
        aux: BTreeMap::new(),
    };
    let mut rates = Rates {
        n1: n1_dot.clone(),
        u1_1: dot(&u11),
        u2_1: dot(&u2_1),
        u3_1: Some(dot(&u3_1)),
        n2: None,
        u1_2: None,
    };
    if let Some(n2j) = n2 {
        let nbar = n1j
            .mul(&n1j)
            .scale(-0.5 * v)
            .add(&n1j.d(0, 2).scale(model.alpha))
            .add(&n1j.lap(1..3).scale(model.beta - v.powi(3)))
            .zero_x1_mean();
        let u12 = n2j.scale(v).add(&nbar);
        let phibar = p1.lap(0..3).sub(&p1.mul(&p1).scale(0.5));
        let phi2 = n2j.add(&phibar);
        let u3_3 = u2_2
            .d(0, 1)
            .scale(-v)
            .add(&n2j.d(1, 1).sub(&n1j.mul(&n1j.d(1, 1))).scale(ti))
            .add(&phi2.d(1, 1));
        let u2_3 = u3_2
            .d(0, 1)
            .scale(v)
            .sub(&n2j.d(2, 1).sub(&n1j.mul(&n1j.d(2, 1))).scale(ti))
            .sub(&phi2.d(2, 1));
        let u3_4 = Jet::new(dot(&u2_1), None)
            .sub(&u2_3.d(0, 1).scale(v))
            .add(&u11.mul(&u2_1.d(0, 1)));
        let u2_4 = Jet::new(dot(&u3_1), None)
            .scale(-1.0)
            .add(&u3_3.d(0, 1).scale(v))
            .sub(&u11.mul(&u3_1.d(0, 1)));
        aux.insert("n_zk".to_string(), nbar.value.clone());
        aux.insert("phi_zk".to_string(), phibar.value);
        aux.insert("u2_3".to_string(), u2_3.value);
        aux.insert("u3_3".to_string(), u3_3.value);
        aux.insert("u2_4".to_string(), u2_4.value);
        aux.insert("u3_4".to_string(), u3_4.value);
        h.order = 2;
        h.n2 = Some(n2j.value.clone());
        h.u1_2 = Some(u12.value.clone());
        h.phi2 = Some(phi2.value);
        rates.n2 = n2j.dot.clone();
        rates.u1_2 = u12.dot;
    }
    h.aux = aux;
    Ok((h, rates))
}

fn expect_dim(n1: &RealField, dim: usize, what: &str) -> Result<()> {
    if n1.grid().rank() != dim {
        return Err(Error::config(format!(
            "{what} profiles need a {dim}D grid, got rank {}",
            n1.grid().rank()
        )));
    }
    Ok(())
}

/// u1 = V n1, phi1 = n1, u2 = V d1^{-1} d2 n1.
pub fn first_order_profiles_kp(n1: &RealField, v: f64) -> Result<ProfileHierarchy> {
    expect_dim(n1, 2, "KP")?;
    Ok(canonical(n1, v, None)?.0)
}

/// u1 = V n1, phi1 = n1, (u2, u3) = V^2 (-d3 n1, d2 n1), plus their eps^2 companions.
pub fn first_order_profiles_zk(n1: &RealField, v: f64) -> Result<ProfileHierarchy> {
    expect_dim(n1, 3, "ZK")?;
    Ok(canonical(n1, v, None)?.0)
}

/// Rate of n2 from the linearized limit equation with the assembled source.
pub fn second_order_rate(n1: &RealField, n2: &RealField, v: f64) -> Result<RealField> {
    let model = model_for(n1.grid().rank(), v);
    let g = super::source::second_order_source(n1, v)?;
    Ok(model.linearized_rhs(n1, n2, Some(&model.integrate_source(&g)?)))
}

fn second_order(n1: &RealField, n2: &RealField, v: f64) -> Result<ProfileHierarchy> {
    if n2.grid() != n1.grid() {
        return Err(Error::config("n1 and n2 live on different grids"));
    }
    let rate = second_order_rate(n1, n2, v)?;
    Ok(canonical(n1, v, Some(&Jet::new(n2.clone(), Some(rate))))?.0)
}

pub fn second_order_profiles_kp(n1: &RealField, n2: &RealField, v: f64) -> Result<ProfileHierarchy> {
    expect_dim(n1, 2, "KP")?;
    model_for(2, v).check_constraint(n2, "n2")?;
    second_order(n1, n2, v)
}

pub fn second_order_profiles_zk(n1: &RealField, n2: &RealField, v: f64) -> Result<ProfileHierarchy> {
    expect_dim(n1, 3, "ZK")?;
    second_order(n1, n2, v)
}

/// As `second_order_profiles_zk` but with u1_2 = c n2 + underline-n. Only c = V
/// is consistent for T_i > 0; other values exist so the residual check can be
/// run against the alternative coefficient.
pub fn second_order_profiles_zk_coeff(n1: &RealField, n2: &RealField, v: f64, c: f64) -> Result<ProfileHierarchy> {
    let mut h = second_order_profiles_zk(n1, n2, v)?;
    let mut u12 = n2 * c;
    u12 += h.need("n_zk")?;
    h.u1_2 = Some(u12);
    Ok(h)
}
