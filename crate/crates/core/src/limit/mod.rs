//! KP-II and ZK limit equations and their linearizations.

mod config;
mod invariants;
mod soliton;
mod solver;
mod trajectory;

pub use config::{dispersion_coeff, zk_transverse_coeff, LimitConfig, LimitEquation};
pub use invariants::{conserved_quantities, hamiltonian, Invariants};
pub use soliton::{kdv_line_soliton, peak_position, soliton_amplitude_speed};
pub use solver::{
    kp2_linear_symbol, solve_kp2, solve_linearized_kp, solve_linearized_zk, solve_zk,
    zk_linear_symbol, LimitModel, LinearizedSource,
};
pub use trajectory::Trajectory;
