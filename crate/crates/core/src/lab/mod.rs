//! Epsilon sweeps: well-prepared EP runs against their profile expansions.

mod config;
mod fit;
mod remainder;
mod study;

pub use config::{initial_profile, GridSpec, InitialSpec, LimitSpec, StepperSpec, StudyConfig, SCHEMA_VERSION};
pub use fit::{fit_order, OrderFit};
pub use remainder::{compute_remainder, remainder_norm_report, ComponentNorms, RemainderNorms, RemainderState};
pub use study::{run_convergence_study, ConvergenceTable, EpsilonSummary, TableRow, CSV_HEADER};
