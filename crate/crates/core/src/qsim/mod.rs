//! Dense statevector simulation and the task judges built on it.

mod classifier;
mod gates;
mod state;

pub use classifier::{classify_accuracy, make_linear_dataset, ClassifierTask, LabeledPoint};
pub use gates::{gate_matrix, GateMatrix};
pub use state::{ghz_fidelity, simulate, StateVector};
