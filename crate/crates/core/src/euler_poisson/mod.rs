//! Full Euler-Poisson solvers in the moving frame: Newton-Krylov Poisson
//! solve and ETDRK4 integration with exact per-mode linear propagation.

mod poisson;
mod state;
mod stepper;
mod symbol;

pub use poisson::{
    poisson_residual, poisson_residual_field, solve_poisson, solve_poisson_detailed,
    PoissonSolution, DEFAULT_MAX_NEWTON, DEFAULT_POISSON_TOL,
};
pub use state::{ep_rhs, EPState, StepperConfig, Tendency, POSITIVITY_FLOOR};
pub use stepper::{
    diagnose, run_ep, run_ep_sampled, step_ep, Diagnostics, DiagnosticsLog, EpStepper,
};
pub use symbol::{decompose_mode, linearized_symbol, sound_speed_sq, ModeDecomposition};
