use serde::{Deserialize, Serialize};

use super::solver::LimitModel;
use crate::spectral::{d, d1_inv, RealField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub mass: f64,
    pub l2: f64,
    pub hamiltonian: Option<f64>,
}

impl Invariants {
    /// Largest relative change of any component against `reference`.
    pub fn relative_drift(&self, reference: &Invariants) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        let mut out = rel(self.l2, reference.l2);
        if reference.mass.abs() > 1e-12 * reference.l2.sqrt() {
            out = out.max(rel(self.mass, reference.mass));
        } else {
            out = out.max((self.mass - reference.mass).abs() / reference.l2.sqrt().max(1e-300));
        }
        if let (Some(a), Some(b)) = (self.hamiltonian, reference.hamiltonian) {
            out = out.max(rel(a, b));
        }
        out
    }
}

/// ZK: int alpha (d1 n)^2/2 + beta |grad_perp n|^2/2 - c_N n^3/6.
/// KP: int alpha (d1 n)^2/2 - (V/4) (d1^{-1} d2 n)^2 - c_N n^3/6.
pub fn hamiltonian(n: &RealField, model: &LimitModel) -> f64 {
    let rank = n.grid().rank();
    let d1n = d(n, 0, 1);
    let mut density = &d1n * &d1n * (0.5 * model.alpha);
    if model.kp {
        if rank > 1 {
            let w = d1_inv(&d(n, 1, 1));
            density.axpy(-0.25 * model.v, &(&w * &w));
        }
    } else {
        for axis in 1..rank {
            let g = d(n, axis, 1);
            density.axpy(0.5 * model.beta, &(&g * &g));
        }
    }
    density.axpy(-model.c_n / 6.0, &n.map(|v| v * v * v));
    density.integral()
}

/// Mass, integral of n^2, and the Hamiltonian for ZK.
pub fn conserved_quantities(n: &RealField, model: &LimitModel) -> Invariants {
    Invariants {
        mass: n.integral(),
        l2: n.map(|v| v * v).integral(),
        hamiltonian: (!model.kp).then(|| hamiltonian(n, model)),
    }
}
