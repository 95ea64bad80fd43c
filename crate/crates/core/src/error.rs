use thiserror::Error;

/// Errors raised by the simulator. Numeric payloads are carried as `f64`
/// regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("delta-mode spectral density cannot be evaluated pointwise")]
    SymbolicDensity,

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("numerical conditioning failure: {0}")]
    Conditioning(String),

    #[error("Floquet truncation K={k} too small: residual {residual:e}, try K={suggested_k}")]
    TruncationTooSmall {
        k: usize,
        residual: f64,
        suggested_k: usize,
    },

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Accuracy { estimate: f64, error_bound: f64 },

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("unsupported drive: {0}")]
    UnsupportedDrive(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error(
        "horizon {horizon} exceeds recurrence guard 0.5*T_rec = {guard}; \
         need about {required_modes} modes"
    )]
    Recurrence {
        horizon: f64,
        guard: f64,
        required_modes: usize,
    },

    #[error("covariance positivity violated at t={time}: symplectic eigenvalue {nu}")]
    Positivity { time: f64, nu: f64 },

    #[error("not converged: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
