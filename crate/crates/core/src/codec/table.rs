use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::circuit::{GateSet, GateSetId};
use crate::error::{Error, Result};
use crate::rng;

/// Largest allowed `|cos|` between two token embeddings.
pub const MAX_ABS_COSINE: f64 = 0.5;
const MAX_ROUNDS: usize = 100_000;

/// Fixed unit-norm embedding per vocabulary token, indexed like [`GateSet::vocabulary`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub gateset: GateSetId,
    pub dim: usize,
    pub seed: u64,
    pub vectors: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Index of the entry most cosine-similar to `v`; ties go to the lowest index.
    pub fn nearest(&self, v: &[f64]) -> usize {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, e) in self.vectors.iter().enumerate() {
            let dot: f64 = e.iter().zip(v).map(|(a, b)| a * b).sum();
            let sim = if norm > 0.0 { dot / norm } else { 0.0 };
            if sim > best.1 {
                best = (i, sim);
            }
        }
        best.0
    }

    pub fn max_abs_cosine(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for b in &self.vectors[..i] {
                worst = worst.max(dot(a, b).abs());
            }
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws one seeded isotropic unit vector per token, redrawing any vector whose `|cos|` with an
/// earlier one exceeds [`MAX_ABS_COSINE`].
pub fn build_table(gateset: &GateSet, dim: usize, seed: u64) -> Result<EmbeddingTable> {
    if dim == 0 {
        return Err(Error::Config("embedding dimension must be positive".into()));
    }
    let mut rng = rng::seeded(seed);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(gateset.vocabulary().len());
    let mut rounds = 0usize;
    while vectors.len() < gateset.vocabulary().len() {
        if rounds >= MAX_ROUNDS {
            return Err(Error::TableConstruction { rounds });
        }
        rounds += 1;
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        if vectors.iter().all(|u| dot(u, &v).abs() <= MAX_ABS_COSINE) {
            vectors.push(v);
        }
    }
    Ok(EmbeddingTable {
        gateset: gateset.id(),
        dim,
        seed,
        vectors,
    })
}
