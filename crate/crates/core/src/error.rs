use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: node id {id} out of range for n = {n}")]
    NodeOutOfBounds { line: usize, id: u64, n: usize },

    #[error("line {line}: edge probability {p} not in [0, 1]")]
    Probability { line: usize, p: f64 },

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("instance too large for exact enumeration: {0}")]
    OracleRefused(String),

    #[error("no gamma in [0, {hi}] satisfies ceil(lambda*(ell + gamma)) <= n^gamma")]
    GammaUnsatisfiable { hi: f64 },

    #[error("rr dump: {0}")]
    Dump(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
