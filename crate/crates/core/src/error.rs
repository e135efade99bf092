use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation at line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("qubit {qubit} out of range for {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("embedding table construction failed after {rounds} rejection rounds")]
    TableConstruction { rounds: usize },

    #[error("dataset rejection sampling accepted {accepted} of {drawn} draws; margin too large")]
    MarginTooLarge { accepted: usize, drawn: usize },

    #[error("corpus balancing failed after {candidates} candidates: {detail}")]
    Balance { candidates: usize, detail: String },

    #[error("training diverged at step {step}: smoothed loss {loss} against initial {initial}")]
    Diverged { step: usize, loss: f64, initial: f64 },

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
