use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler_poisson::EPState;
use crate::spectral::io::{ensure_dir, read_field, read_json, write_field, write_json};
use crate::spectral::{Grid, RealField, ScalingParams};

/// Profiles of the expansion n = 1 + eps n1 + eps^2 n2, u, phi likewise, at one time.
///
/// Velocity components are named `u{component}_{order}`. In 3D the transverse
/// velocities carry half-integer powers: u2_1, u3_1 at eps^{3/2}, u2_2, u3_2 at
/// eps^2 (these depend on n1 only), u2_3, u3_3, u2_4, u3_4 at eps^{5/2}, eps^3.
/// In 2D u2_1 sits at eps^{3/2} and u2_2 at eps^{5/2}.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileHierarchy {
    pub order: usize,
    pub dim: usize,
    pub v: f64,
    pub time: f64,
    pub n1: RealField,
    pub u1_1: RealField,
    pub u2_1: RealField,
    pub u3_1: Option<RealField>,
    pub phi1: RealField,
    pub n2: Option<RealField>,
    pub u1_2: Option<RealField>,
    pub u2_2: Option<RealField>,
    pub u3_2: Option<RealField>,
    pub phi2: Option<RealField>,
    /// Correction terms: u1_kp, phi_kp (2D); n_zk, phi_zk, u2_3, u3_3, u2_4, u3_4 (3D).
    pub aux: BTreeMap<String, RealField>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    order: usize,
    d: usize,
    #[serde(rename = "V")]
    v: f64,
    time: f64,
    #[serde(rename = "epsilon-independent")]
    epsilon_independent: bool,
    fields: BTreeMap<String, String>,
}

const MAIN: [&str; 10] = [
    "n1", "u1_1", "u2_1", "u3_1", "phi1", "n2", "u1_2", "u2_2", "u3_2", "phi2",
];

impl ProfileHierarchy {
    pub fn grid(&self) -> &Grid {
        self.n1.grid()
    }

    pub fn ion_temperature(&self) -> f64 {
        self.v * self.v - 1.0
    }

    pub fn field(&self, name: &str) -> Option<&RealField> {
        match name {
            "n1" => Some(&self.n1),
            "u1_1" => Some(&self.u1_1),
            "u2_1" => Some(&self.u2_1),
            "u3_1" => self.u3_1.as_ref(),
            "phi1" => Some(&self.phi1),
            "n2" => self.n2.as_ref(),
            "u1_2" => self.u1_2.as_ref(),
            "u2_2" => self.u2_2.as_ref(),
            "u3_2" => self.u3_2.as_ref(),
            "phi2" => self.phi2.as_ref(),
            other => self.aux.get(other),
        }
    }

    pub fn field_mut(&mut self, name: &str) -> Option<&mut RealField> {
        match name {
            "n1" => Some(&mut self.n1),
            "u1_1" => Some(&mut self.u1_1),
            "u2_1" => Some(&mut self.u2_1),
            "u3_1" => self.u3_1.as_mut(),
            "phi1" => Some(&mut self.phi1),
            "n2" => self.n2.as_mut(),
            "u1_2" => self.u1_2.as_mut(),
            "u2_2" => self.u2_2.as_mut(),
            "u3_2" => self.u3_2.as_mut(),
            "phi2" => self.phi2.as_mut(),
            other => self.aux.get_mut(other),
        }
    }

    /// Names of all populated fields, main ones first.
    pub fn field_names(&self) -> Vec<String> {
        MAIN.iter()
            .filter(|n| self.field(n).is_some())
            .map(|n| n.to_string())
            .chain(self.aux.keys().cloned())
            .collect()
    }

    pub(crate) fn need(&self, name: &str) -> Result<&RealField> {
        self.field(name)
            .ok_or_else(|| Error::config(format!("hierarchy has no field '{name}' (order {})", self.order)))
    }

    /// Aggregates with n = 1 + eps n~, u = eps u~, phi = eps phi~ at the truncation order.
    pub fn tilde(&self, eps: f64) -> Result<(RealField, Vec<RealField>, RealField)> {
        let s = eps.sqrt();
        let mut n = self.n1.clone();
        let mut u1 = self.u1_1.clone();
        let mut phi = self.phi1.clone();
        let mut u2 = &self.u2_1 * s;
        let mut u3 = self.u3_1.as_ref().map(|f| f * s);
        if self.dim == 3 {
            u2.axpy(eps, self.need("u2_2")?);
            if let Some(u3) = u3.as_mut() {
                u3.axpy(eps, self.need("u3_2")?);
            }
        }
        if self.order >= 2 {
            n.axpy(eps, self.need("n2")?);
            u1.axpy(eps, self.need("u1_2")?);
            phi.axpy(eps, self.need("phi2")?);
            if self.dim == 2 {
                u2.axpy(eps * s, self.need("u2_2")?);
            } else {
                u2.axpy(eps * s, self.need("u2_3")?);
                u2.axpy(eps * eps, self.need("u2_4")?);
                let u3 = u3.as_mut().expect("3D");
                u3.axpy(eps * s, self.need("u3_3")?);
                u3.axpy(eps * eps, self.need("u3_4")?);
            }
        }
        let mut u = vec![u1, u2];
        u.extend(u3);
        Ok((n, u, phi))
    }

    /// Profile expansion of the potential, eps phi~.
    pub fn profile_potential(&self, eps: f64) -> Result<RealField> {
        Ok(self.tilde(eps)?.2 * eps)
    }

    /// Directory of FLD1 files plus manifest.json.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        ensure_dir(dir)?;
        let mut fields = BTreeMap::new();
        for name in self.field_names() {
            let file = format!("{name}.fld");
            write_field(dir.join(&file), self.field(&name).expect("listed"), &name)?;
            fields.insert(name, file);
        }
        write_json(
            dir.join("manifest.json"),
            &Manifest {
                order: self.order,
                d: self.dim,
                v: self.v,
                time: self.time,
                epsilon_independent: true,
                fields,
            },
        )
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<ProfileHierarchy> {
        let dir = dir.as_ref();
        let m: Manifest = read_json(dir.join("manifest.json"))?;
        let mut grid: Option<Grid> = None;
        let mut fields = BTreeMap::new();
        for (name, file) in &m.fields {
            let f = read_field(dir.join(file), grid.as_ref())?.0;
            if let Some(g) = &grid {
                if f.grid() != g {
                    return Err(Error::Format(format!("field '{name}' lives on a different grid")));
                }
            }
            grid = Some(f.grid().clone());
            fields.insert(name.clone(), f);
        }
        let mut take = |name: &str| fields.remove(name);
        let missing = |name: &str| Error::Format(format!("manifest lacks required field '{name}'"));
        let n1 = take("n1").ok_or_else(|| missing("n1"))?;
        let u1_1 = take("u1_1").ok_or_else(|| missing("u1_1"))?;
        let u2_1 = take("u2_1").ok_or_else(|| missing("u2_1"))?;
        let phi1 = take("phi1").ok_or_else(|| missing("phi1"))?;
        let h = ProfileHierarchy {
            order: m.order,
            dim: m.d,
            v: m.v,
            time: m.time,
            n1,
            u1_1,
            u2_1,
            u3_1: take("u3_1"),
            phi1,
            n2: take("n2"),
            u1_2: take("u1_2"),
            u2_2: take("u2_2"),
            u3_2: take("u3_2"),
            phi2: take("phi2"),
            aux: fields,
        };
        if h.n1.grid().rank() != h.dim || !(h.order == 1 || h.order == 2) {
            return Err(Error::Format(format!(
                "manifest order {} / dimension {} inconsistent with the stored fields",
                h.order, h.dim
            )));
        }
        Ok(h)
    }
}

/// Well-prepared Euler-Poisson data from the truncated expansion; the
/// potential comes from the exact Poisson solve.
pub fn assemble_initial_data(h: &ProfileHierarchy, p: &ScalingParams) -> Result<EPState> {
    if h.dim != p.dim() {
        return Err(Error::config(format!(
            "hierarchy is {}D but the parameters are {}D",
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
    let eps = p.epsilon();
    let (nt, ut, _) = h.tilde(eps)?;
    let n = nt.map(|x| 1.0 + eps * x);
    let min_n = n.min();
    if min_n < 0.5 {
        return Err(Error::Positivity { min_n, time: h.time });
    }
    let u = ut.into_iter().map(|f| f * eps).collect();
    let state = EPState::new(n, u, *p, h.time)?;
    let gap = (&state.phi - &h.profile_potential(eps)?).l2();
    log::info!("initial potential differs from its profile expansion by {gap:.3e} (L2)");
    Ok(state)
}
