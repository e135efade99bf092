use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::condition::Condition;
use super::model::{Batch, Denoiser, DenoiserConfig};
use super::schedule::NoiseSchedule;
use crate::codec::{encode, EmbeddingTable};
use crate::dataset::LabeledCircuit;
use crate::error::{Error, Result};
use crate::{exec, rng};

const TRAIN_STREAM: u64 = 0x7a41;
const NOISE_STREAM: u64 = 0x7a42;

/// Optimizer and loop hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    /// Peak learning rate of the one-cycle schedule.
    pub lr: f64,
    pub warmup_fraction: f64,
    /// Probability of replacing a sample's condition by the null condition.
    pub cond_dropout: f64,
    /// Global gradient-norm clip.
    pub grad_clip: Option<f64>,
    /// Window of the moving-average loss.
    pub smoothing: usize,
    /// Abort once the smoothed loss exceeds this multiple of its first full-window value.
    pub divergence_factor: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 2000,
            batch_size: 64,
            lr: 2e-3,
            warmup_fraction: 0.3,
            cond_dropout: 0.1,
            grad_clip: None,
            smoothing: 50,
            divergence_factor: 10.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn check(&self) -> Result<()> {
        let ok = self.steps >= 1
            && self.batch_size >= 1
            && self.lr > 0.0
            && (0.0..1.0).contains(&self.warmup_fraction)
            && (0.0..=1.0).contains(&self.cond_dropout)
            && self.grad_clip.is_none_or(|c| c > 0.0)
            && self.smoothing >= 1
            && self.divergence_factor > 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid training config {self:?}")))
        }
    }

    /// One-cycle learning rate: cosine warmup from `lr/25`, then cosine decay to `lr/25/1e4`.
    pub fn lr_at(&self, step: usize) -> f64 {
        let start = self.lr / 25.0;
        let end = start / 1e4;
        let warm = ((self.warmup_fraction * self.steps as f64).round() as usize).max(1);
        if step < warm {
            let f = step as f64 / warm as f64;
            start + (self.lr - start) * (1.0 - (PI * f).cos()) / 2.0
        } else {
            let span = (self.steps - warm).max(1) as f64;
            let f = ((step - warm) as f64 / span).min(1.0);
            end + (self.lr - end) * (1.0 + (PI * f).cos()) / 2.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub loss: f64,
    /// Mean of the last `smoothing` losses.
    pub smoothed: f64,
    pub lr: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Trained weights, already rounded to the f32 precision they are stored with.
    pub denoiser: Denoiser,
    pub history: Vec<StepRecord>,
    /// Smoothed loss once the first window filled.
    pub initial_smoothed: f64,
    pub final_smoothed: f64,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.loss)
    }
}

/// Everything the loop needs besides hyperparameters.
#[derive(Clone, Copy, Debug)]
pub struct TrainData<'a> {
    pub corpus: &'a [LabeledCircuit],
    pub table: &'a EmbeddingTable,
    pub schedule: &'a NoiseSchedule,
    pub num_qubits: usize,
    pub slots: usize,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * grad[i];
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

/// Trains an ε-predictor from scratch. `on_step` sees every step's telemetry.
pub fn train(
    data: TrainData,
    model: DenoiserConfig,
    hyper: &TrainConfig,
    mut on_step: impl FnMut(&StepRecord),
) -> Result<TrainOutcome> {
    hyper.check()?;
    if data.corpus.is_empty() {
        return Err(Error::Config("training corpus is empty".into()));
    }
    if model.gate_dim != data.table.dim {
        return Err(Error::Config(format!(
            "denoiser gate_dim {} does not match embedding dim {}",
            model.gate_dim, data.table.dim
        )));
    }
    let encoded = exec::map_slice(data.corpus, |rec| -> Result<(Vec<f64>, Condition)> {
        if rec.circuit.num_qubits() != data.num_qubits {
            return Err(Error::Shape {
                expected: format!("{}-qubit circuits", data.num_qubits),
                actual: format!("{} qubits", rec.circuit.num_qubits()),
            });
        }
        let t = encode(&rec.circuit, data.table, data.slots)?;
        Ok((t.data, Condition::new(rec.task, rec.value)))
    });
    let encoded: Vec<(Vec<f64>, Condition)> = encoded.into_iter().collect::<Result<_>>()?;

    let mut denoiser = Denoiser::new(model, hyper.seed)?;
    let mut adam = Adam::new(denoiser.num_params());
    let per = encoded[0].0.len();
    let steps_total = data.schedule.steps();
    let mut window = VecDeque::with_capacity(hyper.smoothing);
    let mut initial_smoothed = None;
    let mut history = Vec::with_capacity(hyper.steps);

    for step in 0..hyper.steps {
        let mut r = rng::derived(hyper.seed, TRAIN_STREAM, step as u64);
        let picks: Vec<(usize, usize, bool)> = (0..hyper.batch_size)
            .map(|_| {
                let idx = r.gen_range(0..encoded.len());
                let t = r.gen_range(0..steps_total);
                let drop = r.gen::<f64>() < hyper.cond_dropout;
                (idx, t, drop)
            })
            .collect();
        let noisy = exec::map_indexed(picks.len(), |b| {
            let mut nr = rng::derived(hyper.seed, NOISE_STREAM, (step * hyper.batch_size + b) as u64);
            let eps: Vec<f64> = (0..per).map(|_| nr.sample(StandardNormal)).collect();
            let (idx, t, _) = picks[b];
            let xt = data.schedule.forward_noise(&encoded[idx].0, t, &eps).expect("matching shapes");
            (xt, eps)
        });
        let mut x = Vec::with_capacity(per * picks.len());
        let mut eps = Vec::with_capacity(per * picks.len());
        for (xt, e) in noisy {
            x.extend(xt);
            eps.extend(e);
        }
        let mut conds: Vec<Condition> = Vec::new();
        let cond_of: Vec<usize> = picks
            .iter()
            .map(|&(idx, _, drop)| {
                let c = if drop { Condition::null() } else { encoded[idx].1 };
                conds.iter().position(|k| *k == c).unwrap_or_else(|| {
                    conds.push(c);
                    conds.len() - 1
                })
            })
            .collect();
        let ts: Vec<usize> = picks.iter().map(|p| p.1).collect();
        let batch = Batch {
            num_qubits: data.num_qubits,
            slots: data.slots,
            x: &x,
            t: &ts,
            conds: &conds,
            cond_of: &cond_of,
        };
        let (loss, mut grad) = denoiser.loss_and_grad(&batch, &eps)?;

        if window.len() == hyper.smoothing {
            window.pop_front();
        }
        window.push_back(loss);
        let smoothed = window.iter().sum::<f64>() / window.len() as f64;
        if window.len() == hyper.smoothing && initial_smoothed.is_none() {
            initial_smoothed = Some(smoothed);
        }
        let diverged = match initial_smoothed {
            _ if !loss.is_finite() => true,
            Some(init) => smoothed > hyper.divergence_factor * init,
            None => false,
        };
        if diverged {
            return Err(Error::Diverged {
                step,
                loss: if loss.is_finite() { smoothed } else { loss },
                initial: initial_smoothed.unwrap_or(f64::NAN),
            });
        }

        if let Some(clip) = hyper.grad_clip {
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > clip {
                grad.iter_mut().for_each(|g| *g *= clip / norm);
            }
        }
        let lr = hyper.lr_at(step);
        adam.step(denoiser.params_mut(), &grad, lr);

        let record = StepRecord { step, loss, smoothed, lr };
        on_step(&record);
        history.push(record);
    }

    for p in denoiser.params_mut() {
        *p = *p as f32 as f64;
    }
    let final_smoothed = history.last().map_or(f64::NAN, |r| r.smoothed);
    Ok(TrainOutcome {
        denoiser,
        initial_smoothed: initial_smoothed.unwrap_or(history[0].smoothed),
        final_smoothed,
        history,
    })
}
