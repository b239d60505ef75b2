use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The filtering POVM has (numerically) zero weight on the supplied state,
    /// so conditional error rates are undefined.
    #[error("state is filtered out (p_fil = {p_fil:e})")]
    FilteredOut { p_fil: f64 },

    /// A normalising probability vanished (no heralds, no QND acceptance, ...).
    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
