use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integrand or callable produced NaN or infinity.
    #[error("non-finite evaluation at t = {point}: {context}")]
    NonFinite { point: f64, context: String },

    /// A scalar root iteration (node construction or node equation) stalled.
    #[error("root iteration failed to converge within {iterations} iterations")]
    RootIteration { iterations: usize },

    /// The marching solver could not close a node equation.
    #[error("nonlinear solve stalled at node {node}: residual {residual:.3e} after {iterations} iterations")]
    NodeConvergence {
        node: usize,
        residual: f64,
        iterations: usize,
    },

    /// The global spectral iteration could not close the collocation system.
    #[error("spectral iteration stalled: residual {residual:.3e} after {} sweeps", history.len())]
    SpectralConvergence { residual: f64, history: Vec<f64> },

    /// A registry lookup with an unrecognized name.
    #[error("unknown problem '{name}'; available: {available}")]
    UnknownProblem { name: String, available: String },

    /// Parameters outside what an operation supports (for example an
    /// infinite beta passed to an integral that requires a finite one).
    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    /// Dyadic panel sums grew instead of settling: the integral diverges.
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// Bad experiment configuration (missing exact solution, empty
    /// resolution list, malformed expressions, ...).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
