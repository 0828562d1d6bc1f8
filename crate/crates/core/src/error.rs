use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{value} exceeds the configured bound {bound}")]
    BoundExceeded { value: u64, bound: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("character must be even (chi(-1) = 1) for this operation")]
    OddCharacter,

    #[error("cusp 1/{w} is not singular for the given character")]
    NotSingular { w: u64 },

    #[error("Re(s) = {re} is outside the region of absolute convergence")]
    OutsideConvergence { re: f64 },

    #[error("{0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
