use thiserror::Error;

/// Why a run stopped; each variant has its own exit code.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Compute(String),
    #[error("{0}")]
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Compute(_) => 1,
            Self::Check(_) => 3,
        }
    }
}

impl From<genmom::Error> for Failure {
    fn from(e: genmom::Error) -> Self {
        Self::Compute(e.to_string())
    }
}
