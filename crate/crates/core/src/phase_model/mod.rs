//! From bosonic coupling tensors to real quadrature models with traceless
//! diagonal diffusion.
//!
//! The usual path is
//! [`CouplingTensor`] → [`validate_couplings`] → [`expand_liouvillian`] →
//! [`to_quadrature_model`], optionally followed by
//! [`RotatedModel::linearize`] for quadratic Hamiltonians. Density-density
//! interactions have phase-space dependent diffusion and go through
//! [`log_transform`] instead.

mod liouvillian;
mod log_transform;
mod poly;
mod quadrature;
mod tensor;

pub use liouvillian::{expand_liouvillian, ComplexCoefficients, ComplexDrift};
pub use log_transform::{log_transform, LogDrift, LogTransformSpec};
pub use poly::Poly;
pub use quadrature::{
    direction_drifts, finite_difference_jacobian, real_diffusion, to_quadrature_model, trace_check,
    DiffusionField, LinearModel, Partition, QuadratureModel, RotatedModel,
};
pub use tensor::{validate_couplings, ConstraintKind, CouplingTensor, ValidationReport, Violation};
