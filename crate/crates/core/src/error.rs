use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("gate {gate} acts on duplicate qubit {index}")]
    DuplicateQubit { gate: &'static str, index: usize },
    #[error("register size must be between 1 and {max}, got {got}")]
    InvalidRegisterSize { got: usize, max: usize },
    #[error("state norm drifted to {norm} (tolerance 1e-9)")]
    NormDrift { norm: f64 },
    #[error("number of shots must be positive")]
    ZeroShots,
    #[error("malformed Pauli label: {0}")]
    MalformedPauli(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sign parameter must be -1 or +1, got {0}")]
    InvalidSign(i32),
    #[error("gate {0} is not native; lower the circuit first")]
    NotNative(&'static str),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("ground state is degenerate (gap {gap:e})")]
    DegenerateGround { gap: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("confusion matrix for qubit {qubit} is singular")]
    SingularMatrix { qubit: usize },
    #[error("input is not a probability distribution (sum {sum})")]
    NotADistribution { sum: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for SimError {
    fn from(e: serde_json::Error) -> Self {
        SimError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
