use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("{requested} qubits exceeds the configured cap of {cap}")]
    QubitCapExceeded { requested: usize, cap: usize },

    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),

    #[error("gate {gate} expects {expected} targets, got {got}")]
    Arity {
        gate: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("empty Pauli support")]
    EmptyPauli,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("projection onto a branch with probability {0:e}")]
    ZeroProbabilityBranch(f64),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid field mask: link {0} is not a pinned link")]
    InvalidFieldMask(usize),

    #[error("zero-norm superposition branch")]
    ZeroNorm,

    #[error("unsupported operator: {0}")]
    Unsupported(String),

    #[error("{0} did not converge after {1} iterations")]
    NoConvergence(&'static str, usize),

    #[error("degenerate reference values: {0}")]
    Degenerate(String),

    #[error("singular readout model on qubit {0}")]
    SingularReadout(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("empty sample set")]
    EmptySamples,
}

pub type Result<T> = std::result::Result<T, Error>;
