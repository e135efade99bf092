//! JSONL corpus persistence: one [`LabeledCircuit`] per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::corpus::LabeledCircuit;
use crate::circuit::GateSet;
use crate::error::{Error, Result};

pub fn write_corpus(path: impl AsRef<Path>, corpus: &[LabeledCircuit]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for record in corpus {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Streams a corpus back, checking every record. With a gate set, circuits must also validate
/// against it.
pub fn read_corpus(path: impl AsRef<Path>, gateset: Option<&GateSet>) -> Result<Vec<LabeledCircuit>> {
    let reader = BufReader::new(File::open(path)?);
    let mut corpus = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| Error::Schema { line: lineno, message };
        let record: LabeledCircuit = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        if !(0.0..=1.0).contains(&record.value) {
            return Err(schema(format!("value {} outside [0, 1]", record.value)));
        }
        if record.gate_count != record.circuit.gate_count() {
            return Err(schema(format!(
                "gate_count {} but circuit has {} gates",
                record.gate_count,
                record.circuit.gate_count()
            )));
        }
        if let Some(set) = gateset {
            let report = record.circuit.validate(set);
            if let Some(v) = report.violations.first() {
                return Err(schema(format!("invalid circuit: {v}")));
            }
        }
        corpus.push(record);
    }
    Ok(corpus)
}
