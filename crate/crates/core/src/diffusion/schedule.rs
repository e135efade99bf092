use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear β schedule and its cumulative products.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSchedule {
    pub beta_start: f64,
    pub beta_end: f64,
    pub betas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub alpha_bars: Vec<f64>,
}

/// Serializable description from which a [`NoiseSchedule`] is rebuilt.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleConfig {
    pub steps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            steps: 1000,
            beta_start: 1e-4,
            beta_end: 0.02,
        }
    }
}

impl ScheduleConfig {
    pub fn build(&self) -> Result<NoiseSchedule> {
        make_schedule(self.steps, self.beta_start, self.beta_end)
    }
}

pub fn make_schedule(steps: usize, beta_start: f64, beta_end: f64) -> Result<NoiseSchedule> {
    if steps < 2 {
        return Err(Error::Config("diffusion needs at least 2 steps".into()));
    }
    if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
        return Err(Error::Config(format!(
            "beta range must satisfy 0 < start <= end < 1 (got {beta_start}..{beta_end})"
        )));
    }
    let betas: Vec<f64> = (0..steps)
        .map(|t| beta_start + (beta_end - beta_start) * t as f64 / (steps - 1) as f64)
        .collect();
    let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
    let alpha_bars = alphas
        .iter()
        .scan(1.0, |acc, a| {
            *acc *= a;
            Some(*acc)
        })
        .collect();
    Ok(NoiseSchedule {
        beta_start,
        beta_end,
        betas,
        alphas,
        alpha_bars,
    })
}

impl NoiseSchedule {
    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    pub fn config(&self) -> ScheduleConfig {
        ScheduleConfig {
            steps: self.steps(),
            beta_start: self.beta_start,
            beta_end: self.beta_end,
        }
    }

    /// `x_t = √ᾱ_t·x0 + √(1−ᾱ_t)·ε`.
    pub fn forward_noise(&self, x0: &[f64], t: usize, eps: &[f64]) -> Result<Vec<f64>> {
        if x0.len() != eps.len() {
            return Err(Error::Shape {
                expected: format!("noise with {} entries", x0.len()),
                actual: format!("{} entries", eps.len()),
            });
        }
        let ab = self.alpha_bars[t];
        let (a, b) = (ab.sqrt(), (1.0 - ab).sqrt());
        Ok(x0.iter().zip(eps).map(|(x, e)| a * x + b * e).collect())
    }

    /// Inverse of [`forward_noise`](Self::forward_noise) for known `ε`.
    pub fn recover_x0(&self, xt: &[f64], t: usize, eps: &[f64]) -> Vec<f64> {
        let ab = self.alpha_bars[t];
        let (a, b) = (ab.sqrt(), (1.0 - ab).sqrt());
        xt.iter().zip(eps).map(|(x, e)| (x - b * e) / a).collect()
    }

    /// One ancestral step `x_t → x_{t−1}` given the predicted noise and a fresh normal draw `z`
    /// (ignored at `t = 0`).
    pub fn reverse_step(&self, xt: &mut [f64], t: usize, eps_hat: &[f64], z: &[f64]) {
        let beta = self.betas[t];
        let coef = beta / (1.0 - self.alpha_bars[t]).sqrt();
        let inv = 1.0 / self.alphas[t].sqrt();
        let sigma = if t > 0 { beta.sqrt() } else { 0.0 };
        for i in 0..xt.len() {
            xt[i] = (xt[i] - coef * eps_hat[i]) * inv + sigma * z[i];
        }
    }
}
