use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("non-finite entry")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("unknown spin label {0}")]
    UnknownLabel(u32),

    #[error("invalid qubit ordering: {0}")]
    InvalidOrdering(String),

    #[error("invalid spin geometry: {0}")]
    InvalidGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
