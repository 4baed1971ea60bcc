use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("carrier mismatch: {lhs} vs {rhs}")]
    CarrierMismatch { lhs: String, rhs: String },

    #[error("invalid group table: {0}")]
    InvalidTable(String),

    #[error("group order {order} exceeds supported limit {limit}")]
    OrderTooLarge { order: usize, limit: usize },

    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),

    #[error("empty measure")]
    EmptyMeasure,

    #[error("negative weight {0}")]
    NegativeWeight(f64),

    #[error("{kind} invariance violated: max deviation {deviation:.3e}")]
    InvarianceViolated { kind: String, deviation: f64 },

    #[error("semigroup law violated: {0}")]
    SemigroupViolation(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot certify: {0}")]
    CannotCertify(String),

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("malformed descriptor: {0}")]
    Descriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
