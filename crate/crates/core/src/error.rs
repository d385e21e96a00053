use thiserror::Error;

/// Errors raised by the library operations.
///
/// Verdict-style checks (bistochasticity, frame functions, POVM axioms, ...)
/// never return these; they produce a [`crate::ValidationReport`] instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix must have dimension at least 1")]
    EmptyMatrix,
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not a projector (max deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },
    #[error("matrix is not a density matrix: {0}")]
    NotDensity(String),
    #[error("set of projectors is not a resolution of the identity: {0}")]
    NotResolution(String),
    #[error("questions {a} and {b} do not commute (deviation {deviation:.3e})")]
    NonCommutingFamily { a: usize, b: usize, deviation: f64 },
    #[error("family is not independent: complete question {atom} is the zero projector")]
    IncompleteFamily { atom: usize },
    #[error("Boolean algebra over {atoms} atoms exceeds the enumeration limit of {limit}")]
    SizeLimit { atoms: usize, limit: usize },
    #[error("probability {value} lies outside [0, 1] beyond tolerance")]
    ProbabilityOutOfRange { value: f64 },
    #[error("conditioning atom {atom} has rank {rank}; a pure conditional state needs rank 1")]
    NonPureConditioning { atom: usize, rank: usize },
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("derived operators violate their invariants: {0}")]
    InvariantViolation(String),
    #[error("index {index} out of range for {len} outcomes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("eigenphase {phase} lies on the logarithm branch cut")]
    BranchCut { phase: f64 },
    #[error("cannot recover a Hamiltonian from a propagator at t = 0")]
    ZeroTime,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
