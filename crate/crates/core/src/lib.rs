//! Quantum phase-space dynamics as the equilibrium of a stochastic partial
//! differential equation in an extra, virtual time dimension.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised along the
//! pipeline it implements:
//!
//! * [`phase_model`]: bosonic coupling tensors, expansion of the Q-function
//!   Liouvillian into drift and diffusion polynomials, real quadrature
//!   models with traceless diagonal diffusion, and the logarithmic
//!   constant-diffusion transform.
//! * [`action`]: discretized time-symmetric stochastic equations, one-step
//!   and path actions for discretizations I, II and III, and the continuum
//!   Lagrangian.
//! * [`bridge`]: the extra-dimensional SPDE `dφ/dτ = φ̈ + Cφ̇ + U + ζ` with
//!   mixed Dirichlet/Robin time boundaries, integrated with a semi-implicit
//!   midpoint method and seeded per-trajectory noise.
//! * [`sampler`]: ensembles, jackknife moment estimates, equilibration
//!   diagnostics and independent reference oracles.
//!
//! File formats, the command line and the parallel ensemble runner live in
//! the `tsaction` companion crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod action;
pub mod bridge;
mod error;
mod linalg;
pub mod phase_model;
pub mod sampler;

pub use error::{Error, Result};
pub use num_complex::Complex64;
