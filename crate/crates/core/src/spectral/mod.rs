//! Periodic Fourier infrastructure: grids, fields, transforms, derivatives, norms.

mod field;
mod grid;
pub mod io;
mod norms;
mod ops;
mod params;

pub use field::{RealField, SpectralField};
pub use grid::Grid;
pub use norms::{
    sobolev_norm, sobolev_norm_spectral, spectral_tail_fraction, triple_norm, NormRole,
};
pub use ops::{
    antiderivative_x1, dealias, dealiased_product, forward_transform, inverse_transform, project,
    spectral_derivative, weighted_gradient, weighted_laplacian, x1_mean,
};
pub use params::{wave_speed, ScalingParams};

pub(crate) use ops::{d, d1_inv, forward_unchecked, integrate_x1};

pub fn build_grid(dims: &[usize], lengths: &[f64]) -> crate::Result<Grid> {
    Grid::new(dims, lengths)
}
