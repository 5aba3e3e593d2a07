use thiserror::Error;

/// Errors raised by the core pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("{n_qubits} qubits exceeds the statevector limit of {limit}")]
    TooManyQubits { n_qubits: usize, limit: usize },

    #[error("pauli words support at most {limit} qubits, requested {n_qubits}")]
    WordTooWide { n_qubits: usize, limit: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("expectation value has imaginary part {imag:e}; operator is not Hermitian")]
    NonHermitian { imag: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid spin-orbital convention: {0}")]
    InvalidConvention(String),

    #[error("closed-shell determinant required, got {0} electrons")]
    OpenShell(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: atoms {0} and {1} coincide")]
    DegenerateGeometry(usize, usize),

    #[error("overlap matrix is near-singular (minimum eigenvalue {0:e})")]
    SingularOverlap(f64),

    #[error("SCF did not converge in {iterations} iterations")]
    ScfNotConverged { iterations: usize },

    #[error("trial state is orthogonal to the projected state at tau = {tau}")]
    OrthogonalTrial { tau: f64 },

    #[error("non-finite energy at optimization step {step}")]
    Diverged { step: usize },

    #[error("rank-deficient least-squares design: {0}")]
    RankDeficient(String),

    #[error("criterion undefined: {0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;
