use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    IndexOutOfRange { index: usize, n_qubits: usize },

    #[error("gate acts on {expected} qubits but {got} targets were given")]
    ArityMismatch { expected: usize, got: usize },

    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),

    #[error("dimension mismatch: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("cannot condition on outcome {outcome}: branch has zero probability")]
    ZeroProbabilityBranch { outcome: u8 },

    #[error("partial trace needs at least one kept qubit")]
    EmptyKeep,

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("password length mismatch: record has {record}, submitted {submitted}")]
    LengthMismatch { record: usize, submitted: usize },
}

pub type Result<T, E = QpError> = std::result::Result<T, E>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(QpError::OutOfRange { name, value, range })
    }
}
