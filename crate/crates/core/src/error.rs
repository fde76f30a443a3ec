use thiserror::Error;

/// Errors raised by the kernel, the representation code and the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A vanishing factor `1 - a p^k` in a shifted factorial.
    #[error("Pochhammer pole: factor 1 - a*p^({k}) vanishes")]
    Pole { k: i64 },

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
