//! Circuit ↔ tensor codec.
//!
//! A circuit over `N` qubits padded to `T` slots becomes a `(d_c + 1) × N × T` real tensor: the
//! first `d_c` channels hold the embedding of the role token at each (qubit, slot), the last
//! channel holds the normalized angle `p = (θ mod 2π)/π − 1`.

mod dump;
mod table;
mod tensor;

pub use dump::{read_tensors, write_tensors, TENSOR_MAGIC, TENSOR_VERSION};
pub use table::{build_table, EmbeddingTable};
pub use tensor::{decode, encode, CircuitTensor, DecodeError, DecodeErrorKind, DecodeOutcome};

/// Normalized parameter for an angle.
pub fn normalize_angle(theta: f64) -> f64 {
    crate::circuit::wrap_angle(theta) / std::f64::consts::PI - 1.0
}

/// Angle for a (possibly noisy) normalized parameter.
pub fn denormalize_angle(p: f64) -> f64 {
    let p = if p.is_nan() { 0.0 } else { p.clamp(-1.0, 1.0) };
    crate::circuit::wrap_angle((p + 1.0) * std::f64::consts::PI)
}
