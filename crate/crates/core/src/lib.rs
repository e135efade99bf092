//! Conditional denoising-diffusion synthesis of parameterized quantum circuits.
//!
//! The crate is organized bottom-up:
//!
//! * [`circuit`]: gate sets, the time-sliced [`Circuit`] type, validation, keys and text/JSON I/O.
//! * [`qsim`]: dense statevector simulation plus the GHZ-fidelity and linear-classifier judges.
//! * [`codec`]: the embedding table and the circuit ↔ tensor mapping used by the diffusion model.
//! * [`dataset`]: structure sampling, per-parameter optimization, balanced corpus construction.
//! * [`diffusion`]: noise schedule, condition encoder, ε-predicting denoiser, training, guided sampling.
//! * [`metrics`]: decoding and scoring of sampled tensors into reports.
//!
//! Data-parallel loops go through [`exec`], which uses rayon when the `parallel` feature is
//! enabled and a plain sequential loop otherwise.

pub mod circuit;
pub mod codec;
pub mod dataset;
pub mod diffusion;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod qsim;
pub mod rng;

pub use circuit::{Circuit, GateKind, GateSet, GateSetId, Placement};
pub use error::{Error, Result};
