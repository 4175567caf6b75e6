use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("construction error: {0}")]
    Construction(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("map is not A-linear: {0}")]
    NotLinear(String),
    #[error("semilinearity relation fails: {0}")]
    NotSemilinear(String),
    #[error("ideal has infinite colength: {0}")]
    InfiniteColength(String),
    #[error("map is not injective: {0}")]
    NotInjective(String),
    #[error("map is not bijective: {0}")]
    NotBijective(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
