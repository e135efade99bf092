use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::condition::Condition;
use super::model::{Batch, Denoiser};
use super::schedule::NoiseSchedule;
use crate::codec::CircuitTensor;
use crate::error::{Error, Result};
use crate::rng::{self, Rng as StreamRng};
use crate::exec;

const SAMPLE_STREAM: u64 = 0x5a3e;

/// Samples per denoiser batch. Fixed so outputs never depend on the thread count.
pub const SAMPLE_CHUNK: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRequest {
    pub condition: Condition,
    /// Guidance scale `w`: 0 is unconditional, 1 conditional, above 1 extrapolates.
    pub guidance: f64,
    pub count: usize,
    pub num_qubits: usize,
    pub slots: usize,
    pub seed: u64,
}

/// `ε_null + w·(ε_cond − ε_null)`.
pub fn guided_noise(eps_null: &[f64], eps_cond: &[f64], w: f64) -> Vec<f64> {
    eps_null.iter().zip(eps_cond).map(|(n, c)| n + w * (c - n)).collect()
}

/// Ancestral DDPM sampling with classifier-free guidance.
///
/// Sample `i` draws all of its noise from its own stream, so each output depends only on
/// `(seed, i)` and the weights.
pub fn sample(denoiser: &Denoiser, schedule: &NoiseSchedule, req: &SampleRequest) -> Result<Vec<CircuitTensor>> {
    if !(req.guidance >= 0.0 && req.guidance.is_finite()) {
        return Err(Error::Config(format!("guidance must be finite and >= 0, got {}", req.guidance)));
    }
    if req.num_qubits == 0 || req.slots == 0 {
        return Err(Error::Config("sampling needs at least one qubit and one slot".into()));
    }
    if req.condition.is_null() && req.guidance != 0.0 {
        return Err(Error::Config("the null condition only supports guidance 0".into()));
    }
    let chunks = req.count.div_ceil(SAMPLE_CHUNK);
    let out = exec::map_indexed(chunks, |ci| {
        let lo = ci * SAMPLE_CHUNK;
        let hi = (lo + SAMPLE_CHUNK).min(req.count);
        sample_chunk(denoiser, schedule, req, lo..hi)
    });
    Ok(out.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

fn sample_chunk(
    denoiser: &Denoiser,
    schedule: &NoiseSchedule,
    req: &SampleRequest,
    range: std::ops::Range<usize>,
) -> Result<Vec<CircuitTensor>> {
    let c = denoiser.config().channels();
    let per = c * req.num_qubits * req.slots;
    let n = range.len();
    let mut rngs: Vec<StreamRng> = range.clone().map(|i| rng::derived(req.seed, SAMPLE_STREAM, i as u64)).collect();
    let mut x: Vec<f64> = Vec::with_capacity(n * per);
    for r in &mut rngs {
        x.extend((0..per).map(|_| r.sample::<f64, _>(StandardNormal)));
    }

    let w = req.guidance;
    let conds = [req.condition, Condition::null()];
    let (want_cond, want_null) = (w != 0.0, w != 1.0);
    let mut cond_of = Vec::with_capacity(2 * n);
    if want_cond {
        cond_of.extend(std::iter::repeat_n(0, n));
    }
    if want_null {
        cond_of.extend(std::iter::repeat_n(1, n));
    }
    let passes = cond_of.len() / n;
    let mut z = vec![0.0; per];

    for t in (0..schedule.steps()).rev() {
        let input: Vec<f64> = if passes == 2 { [x.as_slice(), x.as_slice()].concat() } else { x.clone() };
        let ts = vec![t; cond_of.len()];
        let batch = Batch {
            num_qubits: req.num_qubits,
            slots: req.slots,
            x: &input,
            t: &ts,
            conds: &conds,
            cond_of: &cond_of,
        };
        let eps = denoiser.predict(&batch)?;
        let guided = match (want_cond, want_null) {
            (true, true) => guided_noise(&eps[n * per..], &eps[..n * per], w),
            _ => eps,
        };
        for (b, r) in rngs.iter_mut().enumerate() {
            if t > 0 {
                z.iter_mut().for_each(|v| *v = r.sample(StandardNormal));
            }
            schedule.reverse_step(&mut x[b * per..(b + 1) * per], t, &guided[b * per..(b + 1) * per], &z);
        }
    }
    x.chunks(per)
        .map(|d| CircuitTensor::from_data(c, req.num_qubits, req.slots, d.to_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{DenoiserConfig, ScheduleConfig};

    fn setup() -> (Denoiser, NoiseSchedule) {
        let cfg = DenoiserConfig {
            gate_dim: 4,
            width: 8,
            blocks: 1,
            cond_tokens: 3,
            cond_dim: 4,
            heads: 2,
            value_features: 3,
            ..DenoiserConfig::default()
        };
        let mut d = Denoiser::new(cfg, 1).unwrap();
        d.randomize_output(2);
        let s = ScheduleConfig { steps: 20, ..ScheduleConfig::default() }.build().unwrap();
        (d, s)
    }

    fn request(w: f64) -> SampleRequest {
        SampleRequest {
            condition: Condition::ghz(1.0),
            guidance: w,
            count: SAMPLE_CHUNK + 3,
            num_qubits: 2,
            slots: 3,
            seed: 5,
        }
    }

    #[test]
    fn guidance_identities() {
        let a = [1.0, -2.0];
        let b = [3.0, 5.0];
        assert_eq!(guided_noise(&a, &b, 1.0), b.to_vec());
        assert_eq!(guided_noise(&a, &b, 0.0), a.to_vec());
        assert_eq!(guided_noise(&a, &b, 2.0), vec![5.0, 12.0]);
    }

    #[test]
    fn deterministic_and_independent_of_count() {
        let (d, s) = setup();
        let a = sample(&d, &s, &request(2.5)).unwrap();
        let b = sample(&d, &s, &request(2.5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), SAMPLE_CHUNK + 3);
        assert_eq!(a[0].shape(), [5, 2, 3]);
        let fewer = sample(&d, &s, &SampleRequest { count: 2, ..request(2.5) }).unwrap();
        assert_eq!(fewer[..], a[..2]);
        assert!(a.iter().all(|t| t.data.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn endpoints_match_single_pass_sampling() {
        let (d, s) = setup();
        let uncond = sample(&d, &s, &request(0.0)).unwrap();
        let null_req = SampleRequest { condition: Condition::null(), ..request(0.0) };
        assert_eq!(uncond, sample(&d, &s, &null_req).unwrap());
        let cond = sample(&d, &s, &request(1.0)).unwrap();
        assert_ne!(cond, uncond);
        assert_ne!(sample(&d, &s, &request(7.5)).unwrap(), uncond);
    }

    #[test]
    fn rejects_bad_requests() {
        let (d, s) = setup();
        assert!(sample(&d, &s, &request(-1.0)).is_err());
        assert!(sample(&d, &s, &SampleRequest { slots: 0, ..request(1.0) }).is_err());
    }
}
