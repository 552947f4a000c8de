use thiserror::Error;

/// Errors raised by the filter bank, estimators and experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The neighbourhood of a pilot holds symbols unknown to the receiver.
    #[error("interference at ({subcarrier}, {symbol}) cannot be approximated: neighbour ({nb_subcarrier}, {nb_symbol}) carries unknown data")]
    UnknownNeighbour {
        subcarrier: usize,
        symbol: usize,
        nb_subcarrier: usize,
        nb_symbol: usize,
    },

    #[error("degenerate pilot at subcarrier {subcarrier}: |c| = {magnitude:e}")]
    DegeneratePilot { subcarrier: usize, magnitude: f64 },

    #[error("singular system at subcarrier {subcarrier}")]
    Singular { subcarrier: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("undefined: {0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;
