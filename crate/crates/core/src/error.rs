use alloc::string::String;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coupling tensor for {modes} mode(s) needs {expected} entries, got {got}")]
    Dimension {
        modes: usize,
        expected: usize,
        got: usize,
    },
    #[error("index ({0}, {1}, {2}, {3}) is out of range for {4} mode(s)")]
    IndexOutOfRange(usize, usize, usize, usize, usize),
    #[error("coupling tensor violates {0} hermiticity/permutation constraint(s)")]
    InvalidCouplings(usize),
    #[error("diffusion depends on the phase-space point; use the logarithmic transform for density-density couplings")]
    NonConstantDiffusion,
    #[error("diffusion of the real model could not be brought to traceless diagonal form: {0}")]
    Rotation(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("model has zero diffusion and is deterministic")]
    DeterministicModel,
    #[error("step index {k} is outside 1..={n}")]
    StepOutOfRange { k: usize, n: usize },
    #[error("lattice has {0} point(s), at least 3 are required")]
    LatticeTooShort(usize),
    #[error("malformed boundary specification: {0}")]
    Boundary(String),
    #[error("integration diverged at tau = {tau}, t = {t}, component {component}")]
    Divergence { tau: f64, t: f64, component: usize },
    #[error("trajectory {trajectory}: {source}")]
    Trajectory {
        trajectory: u64,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    #[error("no checkpoint or lattice point matches {0}")]
    MissingCheckpoint(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unsupported model: {0}")]
    Unsupported(String),
}
