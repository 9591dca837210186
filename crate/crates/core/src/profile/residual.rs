use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::build::{canonical, second_order_rate, Rates};
use super::hierarchy::ProfileHierarchy;
use super::jet::Jet;
use crate::error::{Error, Result};
use crate::spectral::{d, dealiased_product as prod, sobolev_norm, RealField, ScalingParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationResidual {
    pub l2: f64,
    pub h2: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub order: usize,
    pub dim: usize,
    pub tolerance: f64,
    /// Keyed "eps{power}.{equation}", e.g. "eps3/2.mom2"; "def.*" entries check
    /// the split of u1_2 and phi2 into n2 terms and corrections.
    pub equations: BTreeMap<String, EquationResidual>,
}

impl ResidualReport {
    pub fn pass(&self) -> bool {
        self.equations.values().all(|e| e.pass)
    }

    pub fn worst(&self) -> (String, f64) {
        self.equations
            .iter()
            .map(|(k, e)| (k.clone(), e.l2))
            .fold((String::new(), 0.0), |a, b| if b.1 > a.1 { b } else { a })
    }
}

fn lap(f: &RealField, axes: std::ops::Range<usize>) -> RealField {
    let mut out = RealField::zeros(f.grid());
    for a in axes {
        out += &d(f, a, 2);
    }
    out
}

/// d1 of n^3 / 3, in conservative form.
fn cube_flux(n: &RealField) -> RealField {
    d(&prod(n, &prod(n, n)), 0, 1) * (1.0 / 3.0)
}

/// The eps^3 combination V (continuity) + (momentum-1) + d1 (Poisson), from
/// which all third-order profiles drop out.
pub(crate) fn elim3(h: &ProfileHierarchy, r: &Rates) -> Result<RealField> {
    let v = h.v;
    let ti = h.ion_temperature();
    let n1 = h.need("n1")?;
    let n2 = h.need("n2")?;
    let u11 = h.need("u1_1")?;
    let u12 = h.need("u1_2")?;
    let p1 = h.need("phi1")?;
    let p2 = h.need("phi2")?;
    let n2_dot = r.n2.as_ref().ok_or_else(|| Error::config("rate of n2 unavailable"))?;
    let u12_dot = r.u1_2.as_ref().ok_or_else(|| Error::config("rate of u1_2 unavailable"))?;

    let mut cont = n2_dot.clone();
    cont += &d(&prod(n1, u12), 0, 1);
    cont += &d(&prod(n2, u11), 0, 1);
    let mut mom = (&cube_flux(n1) - &d(&prod(n1, n2), 0, 1)) * ti;
    mom += &d(&prod(u11, u12), 0, 1);
    mom += u12_dot;
    let mut pois = &(prod(p1, &prod(p1, p1)) * (-1.0 / 6.0)) - &prod(p1, p2);

    if h.dim == 2 {
        let u21 = h.need("u2_1")?;
        let u22 = h.need("u2_2")?;
        cont += &d(&prod(n1, u21), 1, 1);
        cont += &d(u22, 1, 1);
        mom += &prod(u21, &d(u11, 1, 1));
        pois += &d(p1, 1, 2);
        pois += &d(p2, 0, 2);
    } else {
        let u2_2 = h.need("u2_2")?;
        let u3_2 = h.need("u3_2")?;
        cont += &d(&prod(n1, u2_2), 1, 1);
        cont += &d(&prod(n1, u3_2), 2, 1);
        cont += &d(h.need("u2_4")?, 1, 1);
        cont += &d(h.need("u3_4")?, 2, 1);
        mom += &prod(u2_2, &d(u11, 1, 1));
        mom += &prod(u3_2, &d(u11, 2, 1));
        pois += &lap(p2, 0..3);
    }
    Ok(&(&(cont * v) + &mom) + &d(&pois, 0, 1))
}

/// Rates for a stored hierarchy, always recomputed from its n1 (and n2).
pub(crate) fn rates_for(h: &ProfileHierarchy) -> Result<Rates> {
    let n2 = match (&h.n2, h.order) {
        (Some(n2), 2) => Some(Jet::new(n2.clone(), Some(second_order_rate(&h.n1, n2, h.v)?))),
        (None, 2) => return Err(Error::config("order-2 hierarchy lacks n2")),
        _ => None,
    };
    Ok(canonical(&h.n1, h.v, n2.as_ref())?.1)
}

/// Evaluates every coefficient system up to the hierarchy's order.
pub fn residual_order_systems(h: &ProfileHierarchy, p: &ScalingParams) -> Result<ResidualReport> {
    if h.dim != p.dim() || h.n1.grid().rank() != h.dim {
        return Err(Error::config(format!(
            "hierarchy dimension {} does not match the parameters ({})",
            h.dim,
            p.dim()
        )));
    }
    if (h.v - p.wave_speed()).abs() > 1e-12 * p.wave_speed() {
        return Err(Error::config(format!(
            "hierarchy built for V = {} but the parameters give V = {}",
            h.v,
            p.wave_speed()
        )));
    }
    let r = rates_for(h)?;
    let v = h.v;
    let ti = h.ion_temperature();
    let n1 = h.need("n1")?;
    let u11 = h.need("u1_1")?;
    let p1 = h.need("phi1")?;
    let u21 = h.need("u2_1")?;
    let mut eq: Vec<(&str, RealField)> = Vec::new();

    eq.push(("eps1.cont", &d(u11, 0, 1) - &(d(n1, 0, 1) * v)));
    eq.push(("eps1.mom1", &(&(d(n1, 0, 1) * ti) - &(d(u11, 0, 1) * v)) + &d(p1, 0, 1)));
    eq.push(("eps1.pois", n1 - p1));

    // eps^2 with the second-order unknowns eliminated
    let mut elim2 = r.n1.clone();
    elim2 += &d(&prod(n1, u11), 0, 1);
    let mut elim2 = elim2 * v;
    elim2 += &r.u1_1;
    elim2 += &prod(u11, &d(u11, 0, 1));
    elim2.axpy(-ti, &prod(n1, &d(n1, 0, 1)));
    elim2 -= &(d(&prod(p1, p1), 0, 1) * 0.5);

    if h.dim == 2 {
        eq.push(("eps3/2.mom2", &(&(d(n1, 1, 1) * ti) - &(d(u21, 0, 1) * v)) + &d(p1, 1, 1)));
        elim2 += &(d(u21, 1, 1) * v);
        elim2 += &d(p1, 0, 3);
    } else {
        let u31 = h.need("u3_1")?;
        let u2_2 = h.need("u2_2")?;
        let u3_2 = h.need("u3_2")?;
        eq.push(("eps1.mom2", &(&(d(n1, 1, 1) * ti) - u31) + &d(p1, 1, 1)));
        eq.push(("eps1.mom3", &(&(d(n1, 2, 1) * ti) + u21) + &d(p1, 2, 1)));
        eq.push(("eps3/2.cont", &d(u21, 1, 1) + &d(u31, 2, 1)));
        eq.push(("eps3/2.mom2", &(d(u21, 0, 1) * -v) - u3_2));
        eq.push(("eps3/2.mom3", &(d(u31, 0, 1) * -v) + u2_2));
        eq.push(("eps5/2.mom1", &prod(u21, &d(u11, 1, 1)) + &prod(u31, &d(u11, 2, 1))));
        elim2 += &(&(&d(u2_2, 1, 1) + &d(u3_2, 2, 1)) * v);
        elim2 += &d(&lap(p1, 0..3), 0, 1);
    }
    eq.push(("eps2.elim", elim2));

    if h.order >= 2 {
        let n2 = h.need("n2")?;
        let u12 = h.need("u1_2")?;
        let p2 = h.need("phi2")?;
        let mut cont = &(&r.n1 - &(d(n2, 0, 1) * v)) + &d(u12, 0, 1);
        cont += &d(&prod(n1, u11), 0, 1);
        let mut mom = &(&r.u1_1 - &(d(u12, 0, 1) * v)) + &prod(u11, &d(u11, 0, 1));
        mom += &((&d(n2, 0, 1) - &prod(n1, &d(n1, 0, 1))) * ti);
        mom += &d(p2, 0, 1);
        let mut pois = &(n2 - p2) - &(prod(p1, p1) * 0.5);
        if h.dim == 2 {
            cont += &d(u21, 1, 1);
            pois += &d(p1, 0, 2);
            let u22 = h.need("u2_2")?;
            let mut m2 = &(&r.u2_1 - &(d(u22, 0, 1) * v)) + &prod(u11, &d(u21, 0, 1));
            m2 += &((&d(n2, 1, 1) - &prod(n1, &d(n1, 1, 1))) * ti);
            m2 += &d(p2, 1, 1);
            eq.push(("eps5/2.mom2", m2));
        } else {
            let u31 = h.need("u3_1")?;
            let u2_2 = h.need("u2_2")?;
            let u3_2 = h.need("u3_2")?;
            let u2_3 = h.need("u2_3")?;
            let u3_3 = h.need("u3_3")?;
            cont += &(&d(u2_2, 1, 1) + &d(u3_2, 2, 1));
            pois += &lap(p1, 0..3);
            let mut m2 = &(&(&d(n2, 1, 1) - &prod(n1, &d(n1, 1, 1))) * ti) - &(d(u2_2, 0, 1) * v);
            m2 = &(&m2 - u3_3) + &d(p2, 1, 1);
            let mut m3 = &(&(&d(n2, 2, 1) - &prod(n1, &d(n1, 2, 1))) * ti) - &(d(u3_2, 0, 1) * v);
            m3 = &(&m3 + u2_3) + &d(p2, 2, 1);
            eq.push(("eps2.mom2", m2));
            eq.push(("eps2.mom3", m3));
            let mut c52 = &prod(n1, &d(u21, 1, 1)) + &prod(n1, &d(u31, 2, 1));
            c52 += &prod(u21, &d(n1, 1, 1));
            c52 += &prod(u31, &d(n1, 2, 1));
            c52 += &(&d(u2_3, 1, 1) + &d(u3_3, 2, 1));
            eq.push(("eps5/2.cont", c52));
            let u3_1_dot = r.u3_1.as_ref().expect("3D");
            let m2 = &(&(&(d(u2_3, 0, 1) * -v) + &prod(u11, &d(u21, 0, 1))) - h.need("u3_4")?) + &r.u2_1;
            let m3 = &(&(&(d(u3_3, 0, 1) * -v) + &prod(u11, &d(u31, 0, 1))) + h.need("u2_4")?) + u3_1_dot;
            eq.push(("eps5/2.mom2", m2));
            eq.push(("eps5/2.mom3", m3));
        }
        let (ucorr, pcorr) = if h.dim == 2 { ("u1_kp", "phi_kp") } else { ("n_zk", "phi_zk") };
        eq.push(("def.u1_2", &(u12 - &(n2 * v)) - h.need(ucorr)?));
        eq.push(("def.phi2", &(p2 - n2) - h.need(pcorr)?));
        eq.push(("eps2.cont", cont));
        eq.push(("eps2.mom1", mom));
        eq.push(("eps2.pois", pois));
        eq.push(("eps3.elim", elim3(h, &r)?));
    }

    let tolerance = 1e-8 * (1.0 + sobolev_norm(n1, 4));
    let mut equations = BTreeMap::new();
    for (name, f) in eq {
        let l2 = sobolev_norm(&f, 0);
        let h2 = sobolev_norm(&f, 2);
        if !l2.is_finite() || !h2.is_finite() {
            return Err(Error::Numerical(format!("residual of {name} is not finite")));
        }
        equations.insert(
            name.to_string(),
            EquationResidual {
                l2,
                h2,
                pass: l2 <= tolerance,
            },
        );
    }
    Ok(ResidualReport {
        order: h.order,
        dim: h.dim,
        tolerance,
        equations,
    })
}
