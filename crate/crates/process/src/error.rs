use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("the staged process needs exact, finite algebraic closure; {0} lacks it")]
    NonExactAcl(&'static str),
    #[error("scheduled orbit exhausted below the requested draw")]
    OrbitExhausted,
    #[error("stage invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Core(#[from] fraisse_core::CoreError),
}

pub type Result<T> = std::result::Result<T, ProcessError>;
