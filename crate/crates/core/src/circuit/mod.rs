//! Circuit representation: gate sets, time-sliced circuits, validation and serialization.

#[allow(clippy::module_inception)]
mod circuit;
mod gates;
mod text;

pub use circuit::{
    wrap_angle, Circuit, Placement, ValidationResult, Violation, ViolationKind,
};
pub use gates::{GateKind, GateSet, GateSetId, Role, Token};
pub use text::{parse, serialize};
