//! Per-sample decoded-circuit records written by `sample` and read by `evaluate`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use pqcd_core::codec::{DecodeError, DecodeErrorKind, DecodeOutcome};
use pqcd_core::Circuit;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RecordOutcome {
    Decoded {
        circuit: Circuit,
    },
    Error {
        kind: DecodeErrorKind,
        slot: usize,
        qubits: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitRecord {
    pub index: usize,
    pub num_qubits: usize,
    pub slots: usize,
    #[serde(flatten)]
    pub outcome: RecordOutcome,
    pub gen_time_s: f64,
    pub conv_time_s: f64,
}

impl CircuitRecord {
    pub fn new(index: usize, num_qubits: usize, slots: usize, outcome: &DecodeOutcome, gen: f64, conv: f64) -> Self {
        let outcome = match outcome {
            Ok(c) => RecordOutcome::Decoded { circuit: c.clone() },
            Err(e) => RecordOutcome::Error {
                kind: e.kind,
                slot: e.slot,
                qubits: e.qubits.clone(),
            },
        };
        CircuitRecord {
            index,
            num_qubits,
            slots,
            outcome,
            gen_time_s: gen,
            conv_time_s: conv,
        }
    }

    pub fn decode_outcome(&self) -> DecodeOutcome {
        match &self.outcome {
            RecordOutcome::Decoded { circuit } => Ok(circuit.clone()),
            RecordOutcome::Error { kind, slot, qubits } => Err(DecodeError {
                kind: *kind,
                slot: *slot,
                qubits: qubits.clone(),
            }),
        }
    }
}

pub fn write_records(path: &Path, records: &[CircuitRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<CircuitRecord>> {
    let reader = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CircuitRecord = serde_json::from_str(&line)
            .with_context(|| format!("{}: schema violation at line {}", path.display(), i + 1))?;
        if let Some(first) = out.first() {
            let first: &CircuitRecord = first;
            if (first.num_qubits, first.slots) != (rec.num_qubits, rec.slots) {
                bail!("{}: line {} changes the circuit shape", path.display(), i + 1);
            }
        }
        out.push(rec);
    }
    Ok(out)
}
