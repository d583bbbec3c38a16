use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("selected columns are collinear; g-prior requires full column rank (model size {size})")]
    RankDeficient { size: usize },
    #[error("Cholesky factorization failed after jitter retry (model size {size})")]
    NumericalFailure { size: usize },
    #[error("initial proposal probabilities A={add:.3e}, D={del:.3e} fall outside ({epsilon}, 1 - {epsilon})")]
    InitOutOfRange { add: f64, del: f64, epsilon: f64 },
    #[error("{p} variables exceeds the enumeration limit of {limit}")]
    TooManyVariables { p: usize, limit: usize },
    #[error("trace has no samples after burn-in")]
    EmptyTrace,
    #[error("gold standard is identically zero")]
    AllZeroGold,
    #[error("all particle weights are degenerate at t = {t}")]
    DegenerateWeights { t: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Error {
    /// True for errors that originate in linear algebra rather than in inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::NumericalFailure { .. } | Error::DegenerateWeights { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
