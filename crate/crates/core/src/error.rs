use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("configuration has {got} spins but the graph has {expected} interior vertices")]
    SpinLengthMismatch { expected: usize, got: usize },

    #[error("edge configuration has {got} entries but the graph has {expected} edges")]
    EdgeLengthMismatch { expected: usize, got: usize },

    #[error("invalid spin value {0} (must be +1 or -1)")]
    InvalidSpin(i64),

    #[error("invalid inverse temperature {0}")]
    InvalidBeta(f64),

    #[error("invalid involution: {0}")]
    InvalidInvolution(String),

    #[error("occupied edges join boundary vertex {first} (f = {first_spin:+}) and boundary vertex {second} (f = {second_spin:+})")]
    ConflictingBoundary {
        first: u32,
        first_spin: i8,
        second: u32,
        second_spin: i8,
    },

    #[error("invalid lattice parameters: {0}")]
    InvalidLattice(String),

    #[error("graph has no embedding")]
    MissingEmbedding,

    #[error("invalid chain configuration: {0}")]
    InvalidChainConfig(String),

    #[error("instance too large for exact enumeration: {0}")]
    TooLarge(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
