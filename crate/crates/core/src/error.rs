use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("generated substructure exceeds the cap of {cap} points")]
    CapExceeded { cap: usize },
    #[error("operation not supported for structure kind {kind}")]
    Unsupported { kind: &'static str },
    #[error("point does not belong to this structure: {0}")]
    ForeignPoint(String),
    #[error("clopen depth limit (127) exceeded")]
    DepthLimit,
    #[error("malformed structure file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
