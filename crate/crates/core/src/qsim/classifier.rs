use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::circuit::{Circuit, GateKind, Placement};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub x: Vec<f64>,
    /// `+1` or `-1`.
    pub label: i8,
}

/// A linearly separable binary task: labels are `sign(w·x)` with `|w·x| ≥ margin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierTask {
    pub num_features: usize,
    pub margin: f64,
    pub seed: u64,
    /// Unit-norm separating direction.
    pub weights: Vec<f64>,
    pub samples: Vec<LabeledPoint>,
}

impl ClassifierTask {
    /// Default small-register task: 4 features, 300 samples, margin 0.1, seed 274.
    pub fn default_task() -> Self {
        make_linear_dataset(4, 300, 0.1, 274).expect("default task parameters are feasible")
    }

    /// Angle-encoding layer for one point: `rx(π·x_i)` on qubit `i mod n`, in feature order.
    pub fn encoding(x: &[f64], num_qubits: usize) -> Vec<Placement> {
        x.iter()
            .enumerate()
            .map(|(i, &xi)| Placement::rotation(GateKind::Rx, i % num_qubits, std::f64::consts::PI * xi))
            .collect()
    }

    /// Per-sample states after the encoding layer.
    pub fn encoded_states(&self, num_qubits: usize) -> Vec<StateVector> {
        self.samples
            .iter()
            .map(|s| {
                let mut st = StateVector::zero(num_qubits);
                for p in Self::encoding(&s.x, num_qubits) {
                    st.apply(&p).expect("encoding qubits are in range");
                }
                st
            })
            .collect()
    }

    /// Accuracy of `circuit` given precomputed [`encoded_states`](Self::encoded_states).
    pub fn accuracy_from_states(&self, states: &[StateVector], circuit: &Circuit) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let mut correct = 0usize;
        for (s, st) in self.samples.iter().zip(states) {
            let mut st = st.clone();
            if st.apply_circuit(circuit).is_err() {
                return 0.0;
            }
            let pred = if st.expect_z(0) >= 0.0 { 1 } else { -1 };
            correct += usize::from(pred == s.label);
        }
        correct as f64 / self.samples.len() as f64
    }
}

pub fn make_linear_dataset(
    num_features: usize,
    count: usize,
    margin: f64,
    seed: u64,
) -> Result<ClassifierTask> {
    if num_features == 0 || count == 0 || margin.is_nan() || margin < 0.0 {
        return Err(Error::Config(
            "linear dataset needs d >= 1, count >= 1 and margin >= 0".into(),
        ));
    }
    let mut rng = rng::seeded(seed);
    let mut weights: Vec<f64> = (0..num_features)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    weights.iter_mut().for_each(|w| *w /= norm);

    // Acceptance below 1% over this many draws is treated as infeasible.
    let budget = (100 * count).max(1000);
    let mut samples = Vec::with_capacity(count);
    let mut drawn = 0usize;
    while samples.len() < count {
        if drawn >= budget {
            return Err(Error::MarginTooLarge {
                accepted: samples.len(),
                drawn,
            });
        }
        drawn += 1;
        let x: Vec<f64> = (0..num_features).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let score: f64 = x.iter().zip(&weights).map(|(a, b)| a * b).sum();
        if score.abs() >= margin {
            let label = if score >= 0.0 { 1 } else { -1 };
            samples.push(LabeledPoint { x, label });
        }
    }
    Ok(ClassifierTask {
        num_features,
        margin,
        seed,
        weights,
        samples,
    })
}

/// Fraction of samples whose `sign(⟨Z_0⟩)` after encoding + circuit matches the label
/// (`⟨Z_0⟩ = 0` predicts `+1`).
pub fn classify_accuracy(circuit: &Circuit, task: &ClassifierTask) -> f64 {
    let states = task.encoded_states(circuit.num_qubits().max(1));
    task.accuracy_from_states(&states, circuit)
}
