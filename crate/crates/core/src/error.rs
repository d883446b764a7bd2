use thiserror::Error;

use crate::protocol::wire::WireError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters that violate a structural invariant (N < 2, M >= K, non-prime q, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Parameters that are well formed but outside the domain where an operation is defined.
    #[error("parameter domain: {0}")]
    Domain(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("server {server} rejected the query with code {code}")]
    ServerRejected { server: usize, code: u16 },

    #[error("decoded message does not match the stored demand message")]
    DecodeMismatch,

    #[error("enumeration space {space} exceeds the limit {limit}; use the Monte Carlo estimators instead")]
    Infeasible { space: u128, limit: u128 },

    #[error("transport: {0}")]
    Transport(String),

    #[error("malformed database file: {0}")]
    DatabaseFormat(String),

    #[error("malformed server config: {0}")]
    Config(String),

    #[error(transparent)]
    Wire(#[from] WireError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
