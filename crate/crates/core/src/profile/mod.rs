//! Profile hierarchy of the formal expansion, well-prepared data, residual checks.

mod build;
mod hierarchy;
mod jet;
mod residual;
mod source;

pub use build::{
    first_order_profiles_kp, first_order_profiles_zk, second_order_profiles_kp,
    second_order_profiles_zk, second_order_profiles_zk_coeff, second_order_rate,
};
pub use hierarchy::{assemble_initial_data, ProfileHierarchy};
pub use residual::{residual_order_systems, EquationResidual, ResidualReport};
pub use source::{
    kp_source_closed_form, second_order_source, second_order_sources_kp, second_order_sources_zk,
};
