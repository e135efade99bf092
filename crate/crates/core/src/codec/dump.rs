//! Raw tensor dump: `PQCT`, u32 version, u64 channels, u64 qubits, u64 slots, u64 count,
//! then `count · channels · qubits · slots` f32 little-endian values.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::tensor::CircuitTensor;
use crate::error::{Error, Result};

pub const TENSOR_MAGIC: &[u8; 4] = b"PQCT";
pub const TENSOR_VERSION: u32 = 1;

/// Writes same-shaped tensors. An empty list needs an explicit shape.
pub fn write_tensors(path: impl AsRef<Path>, shape: [usize; 3], tensors: &[CircuitTensor]) -> Result<()> {
    if let Some(t) = tensors.iter().find(|t| t.shape() != shape) {
        return Err(Error::Shape {
            expected: format!("{shape:?}"),
            actual: format!("{:?}", t.shape()),
        });
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(TENSOR_MAGIC)?;
    w.write_all(&TENSOR_VERSION.to_le_bytes())?;
    for v in [shape[0], shape[1], shape[2], tensors.len()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for t in tensors {
        for &v in &t.data {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a dump back; returns the stored shape and the tensors.
pub fn read_tensors(path: impl AsRef<Path>) -> Result<([usize; 3], Vec<CircuitTensor>)> {
    let mut r = BufReader::new(fs::File::open(path)?);
    let mut head = [0u8; 40];
    r.read_exact(&mut head)
        .map_err(|_| Error::Checkpoint("tensor dump truncated in header".into()))?;
    if &head[..4] != TENSOR_MAGIC {
        return Err(Error::Checkpoint("not a tensor dump (bad magic)".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
    if version != TENSOR_VERSION {
        return Err(Error::Checkpoint(format!("unsupported tensor dump version {version}")));
    }
    let field = |i: usize| u64::from_le_bytes(head[8 + 8 * i..16 + 8 * i].try_into().expect("8 bytes")) as usize;
    let shape = [field(0), field(1), field(2)];
    let count = field(3);
    let per = shape.iter().product::<usize>();
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if per == 0 || bytes.len() != per * count * 4 {
        return Err(Error::Checkpoint(format!(
            "tensor dump payload has {} bytes, expected {} tensors of {:?}",
            bytes.len(),
            count,
            shape
        )));
    }
    let tensors = bytes
        .chunks_exact(per * 4)
        .map(|chunk| {
            let data = chunk
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            CircuitTensor::from_data(shape[0], shape[1], shape[2], data)
        })
        .collect::<Result<_>>()?;
    Ok((shape, tensors))
}
