//! Pseudospectral laboratory for the dispersive limit of the Euler-Poisson system:
//! full EP solvers, KP-II / ZK limit solvers, profile hierarchies and
//! convergence studies.

pub mod error;
pub mod etd;
pub mod euler_poisson;
pub mod lab;
pub mod limit;
pub mod profile;
pub mod spectral;

pub use error::{Error, Result};
pub use euler_poisson::{EPState, StepperConfig};
pub use spectral::{build_grid, Grid, NormRole, RealField, ScalingParams, SpectralField};
