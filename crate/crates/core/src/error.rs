use thiserror::Error;

/// Errors produced by field construction, solvers, and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} generated at node ({a}, {b})")]
    NonFiniteValue { a: f64, b: f64, value: String },

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error(
        "potential is in the forbidden singularity class: it attracts at least as fast as \
         -hbar^2/(8 m r^2) near the origin, so states collapse toward r = 0"
    )]
    ForbiddenPotential,

    #[error("potential has no radial form; a central potential is required here")]
    NotCentral,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{quantity} out of supported range: {value} not in [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error(
        "eigenvalue not bracketed: node count went from {nodes_lo} to {nodes_hi} over the \
         energy window [{e_lo}, {e_hi}] while looking for index {index}"
    )]
    NotBracketed {
        e_lo: f64,
        e_hi: f64,
        nodes_lo: usize,
        nodes_hi: usize,
        index: usize,
    },

    #[error("angular order {angular} does not match radial order {radial}")]
    OrderMismatch { angular: f64, radial: f64 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("point ({x}, {y}) lies outside the field domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error(
        "loop under-sampled near a node: segment {segment} has phase step {step:.4} rad \
         (limit {limit:.4}) even after refinement to {samples} samples"
    )]
    UnderSampledLoop {
        segment: usize,
        step: f64,
        limit: f64,
        samples: usize,
    },

    #[error("loop sample {index} at ({x}, {y}) falls on a masked region (|psi| below threshold)")]
    MaskedLoopSample { index: usize, x: f64, y: f64 },

    #[error("decomposition rejected: {0}")]
    Decomposition(String),

    #[error("probe rejected: {0}")]
    Probe(String),

    #[error("fit rejected: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
