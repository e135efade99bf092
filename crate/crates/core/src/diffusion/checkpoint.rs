//! Binary checkpoint: `PQCD`, u32 version, u64 header length, JSON header,
//! u64 weight count, then f32 little-endian weights.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Denoiser, DenoiserConfig};
use super::schedule::{NoiseSchedule, ScheduleConfig};
use super::train::{TrainConfig, TrainOutcome};
use crate::circuit::{GateSet, GateSetId};
use crate::codec::{build_table, EmbeddingTable};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"PQCD";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub steps: usize,
    pub final_loss: f64,
    pub initial_smoothed: f64,
    pub final_smoothed: f64,
    pub hyper: TrainConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub gateset: GateSetId,
    pub embedding_dim: usize,
    pub embedding_seed: u64,
    pub schedule: ScheduleConfig,
    pub model: DenoiserConfig,
    /// Grid the model was trained on.
    pub num_qubits: usize,
    pub slots: usize,
    pub training: TrainingMeta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub weights: Vec<f32>,
}

impl Checkpoint {
    pub fn from_training(
        outcome: &TrainOutcome,
        table: &EmbeddingTable,
        schedule: &NoiseSchedule,
        hyper: &TrainConfig,
        num_qubits: usize,
        slots: usize,
    ) -> Self {
        let header = CheckpointHeader {
            gateset: table.gateset,
            embedding_dim: table.dim,
            embedding_seed: table.seed,
            schedule: schedule.config(),
            model: outcome.denoiser.config().clone(),
            num_qubits,
            slots,
            training: TrainingMeta {
                steps: outcome.history.len(),
                final_loss: outcome.final_loss(),
                initial_smoothed: outcome.initial_smoothed,
                final_smoothed: outcome.final_smoothed,
                hyper: hyper.clone(),
            },
        };
        Checkpoint {
            header,
            weights: outcome.denoiser.params().iter().map(|&p| p as f32).collect(),
        }
    }

    pub fn denoiser(&self) -> Result<Denoiser> {
        Denoiser::from_params(self.header.model.clone(), self.weights.iter().map(|&w| w as f64).collect())
    }

    /// Rebuilds the embedding table from its seed.
    pub fn table(&self) -> Result<EmbeddingTable> {
        build_table(&GateSet::new(self.header.gateset), self.header.embedding_dim, self.header.embedding_seed)
    }

    pub fn schedule(&self) -> Result<NoiseSchedule> {
        self.header.schedule.build()
    }

    pub fn to_writer(&self, mut w: impl Write) -> Result<()> {
        let header = serde_json::to_vec(&self.header)?;
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        w.write_all(&(self.weights.len() as u64).to_le_bytes())?;
        for v in &self.weights {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn from_reader(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic, "magic")?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
        }
        let version = u32::from_le_bytes(read_array(&mut r, "version")?);
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {version} (this build reads {CHECKPOINT_VERSION})"
            )));
        }
        let len = u64::from_le_bytes(read_array(&mut r, "header length")?) as usize;
        if len > 1 << 24 {
            return Err(Error::Checkpoint(format!("implausible header length {len}")));
        }
        let mut header = vec![0u8; len];
        read_exact(&mut r, &mut header, "header")?;
        let header: CheckpointHeader =
            serde_json::from_slice(&header).map_err(|e| Error::Checkpoint(format!("header: {e}")))?;
        let count = u64::from_le_bytes(read_array(&mut r, "weight count")?) as usize;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != count * 4 {
            return Err(Error::Checkpoint(format!(
                "expected {count} weights, found {} bytes",
                bytes.len()
            )));
        }
        let weights = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let ck = Checkpoint { header, weights };
        ck.denoiser()?;
        Ok(ck)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.to_writer(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(BufReader::new(fs::File::open(path)?))
    }
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Checkpoint(format!("truncated while reading {what}")),
        _ => Error::Io(e),
    })
}

fn read_array<const N: usize>(r: &mut impl Read, what: &str) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    read_exact(r, &mut b, what)?;
    Ok(b)
}
