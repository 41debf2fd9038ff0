use exclusion_core::CoreError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("pole: {0} vanishes")]
    Pole(String),
    #[error("{what} is not available for {model}")]
    Unsupported { what: String, model: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("kernel of the Markov matrix has dimension {0}, expected 1")]
    KernelDimension(usize),
    #[error("normalization vanishes: {0}")]
    ZeroNormalization(String),
    #[error("truncation did not converge: {0}")]
    NoConvergence(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn unsupported(what: impl Into<String>, model: impl Into<String>) -> Self {
        Error::Unsupported { what: what.into(), model: model.into() }
    }

    /// Errors caused by the sampled point rather than by the model itself.
    pub fn is_pole(&self) -> bool {
        matches!(self, Error::Pole(_))
    }
}
