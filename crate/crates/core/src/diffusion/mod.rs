//! Conditional denoising diffusion over circuit tensors.

mod checkpoint;
mod condition;
mod model;
pub mod nn;
mod sample;
mod schedule;
mod train;

pub use checkpoint::{Checkpoint, CheckpointHeader, TrainingMeta, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use condition::Condition;
pub use model::{Batch, Denoiser, DenoiserConfig, ParamSpec};
pub use sample::{guided_noise, sample, SampleRequest, SAMPLE_CHUNK};
pub use schedule::{make_schedule, NoiseSchedule, ScheduleConfig};
pub use train::{train, StepRecord, TrainConfig, TrainData, TrainOutcome};
