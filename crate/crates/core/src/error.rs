use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: requested {requested}, limit {limit}")]
    Capacity { requested: u64, limit: u64 },

    #[error("{what} = {value} is outside the supported range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{a} is not invertible modulo {modulus}")]
    NotInvertible { a: i64, modulus: i64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("declared scales are inconsistent: {0}")]
    ScaleInconsistent(String),

    #[error("phase has {0} stationary points on the interval; expected at most one")]
    MultipleStationaryPoints(usize),

    #[error("no stationary point on the interval")]
    NoStationaryPoint,

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("contour integral failed: {0}")]
    Contour(String),

    #[error("side condition violated: {0}")]
    SideCondition(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
