use thiserror::Error;

/// Errors raised by the library. Check failures are reported through
/// report types instead of this enum.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("linear solve failed ({reason}); condition estimate {condition:.3e}")]
    Solver { reason: String, condition: f64 },

    #[error("envelope clause `{clause}` violated at node {node} (x = {x:.6})")]
    Clause {
        clause: &'static str,
        node: usize,
        x: f64,
    },

    #[error("invalid obstacle pair: lower envelope exceeds upper at node {node}")]
    InvalidPair { node: usize },

    #[error("stagnation after {iters} iterations: projected gradient norm {grad_norm:.3e}, last step {step:.3e}")]
    Stagnation {
        iters: usize,
        grad_norm: f64,
        step: f64,
    },

    #[error("energy increased by {increase:.3e} at iteration {iter}")]
    EnergyIncrease { iter: usize, increase: f64 },

    #[error("non-convergence at stage `{stage}`: {detail}")]
    NonConvergence { stage: String, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
