//! Reference ε-predictor.
//!
//! Layout, per sample: the `(d_c + d_p) × N × T` input is viewed as `N·T` position rows.
//!
//! ```text
//! h = rows · W_in
//! K × block:  u = LN(h) → dwconv3x3 → pointwise → + time(t) → SiLU
//!             u = u + CrossAttn(u, condition tokens)
//!             h = h + pointwise(dwconv3x3(SiLU(u)))
//! ε̂ = SiLU(LN(h)) · W_out
//! ```
//!
//! No weight depends on `N` or `T`, so one set of weights runs on any grid size.

use std::ops::Range;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::condition::Condition;
use super::nn;
use crate::error::{Error, Result};
use crate::{exec, rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DenoiserConfig {
    /// `d_c`.
    pub gate_dim: usize,
    /// `d_p`.
    pub param_dim: usize,
    pub width: usize,
    pub blocks: usize,
    pub cond_tokens: usize,
    pub cond_dim: usize,
    pub heads: usize,
    /// Number of sinusoid frequencies applied to the condition target.
    pub value_features: usize,
}

impl Default for DenoiserConfig {
    fn default() -> Self {
        DenoiserConfig {
            gate_dim: 16,
            param_dim: 1,
            width: 64,
            blocks: 6,
            cond_tokens: 8,
            cond_dim: 64,
            heads: 4,
            value_features: 8,
        }
    }
}

impl DenoiserConfig {
    pub fn channels(&self) -> usize {
        self.gate_dim + self.param_dim
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("denoiser: {m}")));
        if self.gate_dim == 0 || self.param_dim != 1 {
            return bad("need gate_dim >= 1 and param_dim == 1");
        }
        if self.width < 2 || !self.width.is_multiple_of(2) {
            return bad("width must be even and at least 2");
        }
        if self.heads == 0 || !self.width.is_multiple_of(self.heads) {
            return bad("width must be divisible by heads");
        }
        if self.cond_tokens < 2 || self.cond_dim == 0 || self.value_features == 0 {
            return bad("need cond_tokens >= 2, cond_dim >= 1, value_features >= 1");
        }
        if self.value_features > 52 {
            return bad("value_features above 52 exceed f64 resolution");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct BlockParams {
    ln_g: Range<usize>,
    ln_b: Range<usize>,
    dw1: Range<usize>,
    dw1_b: Range<usize>,
    pw1: Range<usize>,
    pw1_b: Range<usize>,
    temb_w: Range<usize>,
    temb_b: Range<usize>,
    wq: Range<usize>,
    wk: Range<usize>,
    wv: Range<usize>,
    wo: Range<usize>,
    wo_b: Range<usize>,
    dw2: Range<usize>,
    dw2_b: Range<usize>,
    pw2: Range<usize>,
    pw2_b: Range<usize>,
}

/// Named tensor inside the flat parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Layout {
    in_w: Range<usize>,
    in_b: Range<usize>,
    time_w: Range<usize>,
    time_b: Range<usize>,
    task_emb: Range<usize>,
    val_w: Range<usize>,
    val_b: Range<usize>,
    null_seq: Range<usize>,
    blocks: Vec<BlockParams>,
    out_ln_g: Range<usize>,
    out_ln_b: Range<usize>,
    out_w: Range<usize>,
    out_b: Range<usize>,
    specs: Vec<(ParamSpec, Range<usize>)>,
    total: usize,
}

impl Layout {
    fn new(cfg: &DenoiserConfig) -> Self {
        let (c, w, d, l) = (cfg.channels(), cfg.width, cfg.cond_dim, cfg.cond_tokens);
        let mut specs = Vec::new();
        let mut total = 0usize;
        let mut alloc = |name: String, shape: Vec<usize>| {
            let len: usize = shape.iter().product();
            let r = total..total + len;
            total += len;
            specs.push((ParamSpec { name, shape }, r.clone()));
            r
        };
        let in_w = alloc("in.weight".into(), vec![c, w]);
        let in_b = alloc("in.bias".into(), vec![w]);
        let time_w = alloc("time.weight".into(), vec![w, w]);
        let time_b = alloc("time.bias".into(), vec![w]);
        let task_emb = alloc("cond.task".into(), vec![3, d]);
        let val_w = alloc("cond.value.weight".into(), vec![2 * cfg.value_features, (l - 1) * d]);
        let val_b = alloc("cond.value.bias".into(), vec![(l - 1) * d]);
        let null_seq = alloc("cond.null".into(), vec![l - 1, d]);
        let blocks = (0..cfg.blocks)
            .map(|k| {
                let mut a = |n: &str, s: Vec<usize>| alloc(format!("block{k}.{n}"), s);
                BlockParams {
                    ln_g: a("norm.gain", vec![w]),
                    ln_b: a("norm.bias", vec![w]),
                    dw1: a("conv1.depthwise", vec![9, w]),
                    dw1_b: a("conv1.depthwise_bias", vec![w]),
                    pw1: a("conv1.pointwise", vec![w, w]),
                    pw1_b: a("conv1.pointwise_bias", vec![w]),
                    temb_w: a("time.weight", vec![w, w]),
                    temb_b: a("time.bias", vec![w]),
                    wq: a("attn.query", vec![w, w]),
                    wk: a("attn.key", vec![d, w]),
                    wv: a("attn.value", vec![d, w]),
                    wo: a("attn.out", vec![w, w]),
                    wo_b: a("attn.out_bias", vec![w]),
                    dw2: a("conv2.depthwise", vec![9, w]),
                    dw2_b: a("conv2.depthwise_bias", vec![w]),
                    pw2: a("conv2.pointwise", vec![w, w]),
                    pw2_b: a("conv2.pointwise_bias", vec![w]),
                }
            })
            .collect();
        let out_ln_g = alloc("out.norm.gain".into(), vec![w]);
        let out_ln_b = alloc("out.norm.bias".into(), vec![w]);
        let out_w = alloc("out.weight".into(), vec![w, c]);
        let out_b = alloc("out.bias".into(), vec![c]);
        Layout {
            in_w,
            in_b,
            time_w,
            time_b,
            task_emb,
            val_w,
            val_b,
            null_seq,
            blocks,
            out_ln_g,
            out_ln_b,
            out_w,
            out_b,
            specs,
            total,
        }
    }
}

/// Noisy tensors plus their timesteps and conditions.
///
/// `x` holds `t.len()` samples back to back, each `channels × num_qubits × slots` channel-major.
/// Sample `b` is conditioned on `conds[cond_of[b]]`.
#[derive(Clone, Copy, Debug)]
pub struct Batch<'a> {
    pub num_qubits: usize,
    pub slots: usize,
    pub x: &'a [f64],
    pub t: &'a [usize],
    pub conds: &'a [Condition],
    pub cond_of: &'a [usize],
}

impl Batch<'_> {
    fn len(&self) -> usize {
        self.t.len()
    }

    fn positions(&self) -> usize {
        self.num_qubits * self.slots
    }
}

#[derive(Default)]
struct BlockTrace {
    h_in: Vec<f64>,
    ln_stats: Vec<(f64, f64)>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u3: Vec<f64>,
    u4: Vec<f64>,
    q: Vec<f64>,
    keys: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
    probs: Vec<f64>,
    o: Vec<f64>,
    u5: Vec<f64>,
    u6: Vec<f64>,
    u7: Vec<f64>,
}

#[derive(Default)]
struct Trace {
    rows: Vec<f64>,
    temb_raw: Vec<f64>,
    tm_pre: Vec<f64>,
    tm: Vec<f64>,
    tokens: Vec<Vec<f64>>,
    feats: Vec<Vec<f64>>,
    blocks: Vec<BlockTrace>,
    h_final: Vec<f64>,
    out_stats: Vec<(f64, f64)>,
    f0: Vec<f64>,
    f1: Vec<f64>,
}

/// The denoiser: configuration plus a flat parameter vector.
#[derive(Clone, Debug)]
pub struct Denoiser {
    config: DenoiserConfig,
    layout: Layout,
    params: Vec<f64>,
}

const INIT_STREAM: u64 = 0x1417;

impl Denoiser {
    /// Seeded initialization with a zero output projection, so the initial prediction is `ε̂ = 0`.
    pub fn new(config: DenoiserConfig, seed: u64) -> Result<Self> {
        config.check()?;
        let layout = Layout::new(&config);
        let mut params = vec![0.0; layout.total];
        let mut rng = rng::derived(seed, INIT_STREAM, 0);
        let (w, d, c) = (config.width as f64, config.cond_dim as f64, config.channels() as f64);
        let mut fill = |r: &Range<usize>, std: f64| {
            let dist = Normal::new(0.0, std).expect("finite std");
            for p in &mut params[r.clone()] {
                *p = dist.sample(&mut rng);
            }
        };
        fill(&layout.in_w, 1.0 / c.sqrt());
        fill(&layout.time_w, 1.0 / w.sqrt());
        fill(&layout.task_emb, 1.0);
        fill(&layout.val_w, 1.0 / (2.0 * config.value_features as f64).sqrt());
        fill(&layout.null_seq, 1.0);
        for b in &layout.blocks {
            fill(&b.dw1, 1.0 / 3.0);
            fill(&b.pw1, 1.0 / w.sqrt());
            fill(&b.temb_w, 1.0 / w.sqrt());
            fill(&b.wq, 1.0 / w.sqrt());
            fill(&b.wk, 1.0 / d.sqrt());
            fill(&b.wv, 1.0 / d.sqrt());
            fill(&b.wo, 1.0 / w.sqrt());
            fill(&b.dw2, 1.0 / 3.0);
            fill(&b.pw2, 0.5 / w.sqrt());
        }
        for r in std::iter::once(&layout.out_ln_g).chain(layout.blocks.iter().map(|b| &b.ln_g)) {
            params[r.clone()].fill(1.0);
        }
        Ok(Denoiser {
            config,
            layout,
            params,
        })
    }

    /// Rebuilds a denoiser around an existing parameter vector.
    pub fn from_params(config: DenoiserConfig, params: Vec<f64>) -> Result<Self> {
        config.check()?;
        let layout = Layout::new(&config);
        if params.len() != layout.total {
            return Err(Error::Shape {
                expected: format!("{} parameters", layout.total),
                actual: format!("{} parameters", params.len()),
            });
        }
        Ok(Denoiser {
            config,
            layout,
            params,
        })
    }

    /// Fills the output projection with small random weights (a zero projection makes most
    /// gradients vanish, which is useless for gradient checks).
    pub fn randomize_output(&mut self, seed: u64) {
        let mut rng = rng::derived(seed, INIT_STREAM, 1);
        let dist = Normal::new(0.0, 0.3).expect("finite std");
        for r in [self.layout.out_w.clone(), self.layout.out_b.clone()] {
            for p in &mut self.params[r] {
                *p = dist.sample(&mut rng);
            }
        }
    }

    pub fn config(&self) -> &DenoiserConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn param_specs(&self) -> Vec<ParamSpec> {
        self.layout.specs.iter().map(|(s, _)| s.clone()).collect()
    }

    fn p(&self, r: &Range<usize>) -> &[f64] {
        &self.params[r.clone()]
    }

    /// Condition tokens `L × D` for one condition.
    pub fn condition_tokens(&self, cond: &Condition) -> Vec<f64> {
        self.tokens_and_features(cond).0
    }

    fn tokens_and_features(&self, cond: &Condition) -> (Vec<f64>, Vec<f64>) {
        let (d, l, f) = (self.config.cond_dim, self.config.cond_tokens, self.config.value_features);
        let mut tokens = vec![0.0; l * d];
        let ti = cond.task_index();
        tokens[..d].copy_from_slice(&self.p(&self.layout.task_emb)[ti * d..(ti + 1) * d]);
        let feats = cond.value_features(f);
        if cond.is_null() {
            tokens[d..].copy_from_slice(self.p(&self.layout.null_seq));
        } else {
            let v = nn::linear(&feats, 1, self.p(&self.layout.val_w), Some(self.p(&self.layout.val_b)), 2 * f, (l - 1) * d);
            tokens[d..].copy_from_slice(&v);
        }
        (tokens, feats)
    }

    /// `ε̂` for every sample in the batch, laid out like `batch.x`.
    pub fn predict(&self, batch: &Batch) -> Result<Vec<f64>> {
        self.check_batch(batch)?;
        Ok(self.forward(batch, None))
    }

    /// Batch loss `mean_b ‖ε_b − ε̂_b‖²` and its gradient with respect to every parameter.
    pub fn loss_and_grad(&self, batch: &Batch, eps: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_batch(batch)?;
        if eps.len() != batch.x.len() {
            return Err(Error::Shape {
                expected: format!("{} noise values", batch.x.len()),
                actual: format!("{}", eps.len()),
            });
        }
        let mut trace = Trace::default();
        let out = self.forward(batch, Some(&mut trace));
        let scale = 1.0 / batch.len() as f64;
        let loss = out.iter().zip(eps).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * scale;
        let dout: Vec<f64> = out.iter().zip(eps).map(|(a, b)| 2.0 * (a - b) * scale).collect();
        let grad = self.backward(batch, &trace, &dout);
        Ok((loss, grad))
    }

    /// Batch loss only, for finite-difference checks.
    pub fn loss(&self, batch: &Batch, eps: &[f64]) -> Result<f64> {
        let out = self.predict(batch)?;
        Ok(out.iter().zip(eps).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / batch.len() as f64)
    }

    fn check_batch(&self, batch: &Batch) -> Result<()> {
        let per = self.config.channels() * batch.positions();
        let ok = batch.num_qubits >= 1
            && batch.slots >= 1
            && batch.x.len() == per * batch.len()
            && batch.cond_of.len() == batch.len()
            && batch.cond_of.iter().all(|&c| c < batch.conds.len());
        if !ok {
            return Err(Error::Shape {
                expected: format!(
                    "{} samples of {}x{}x{} with valid condition indices",
                    batch.len(),
                    self.config.channels(),
                    batch.num_qubits,
                    batch.slots
                ),
                actual: format!("{} values", batch.x.len()),
            });
        }
        Ok(())
    }

    fn forward(&self, batch: &Batch, trace: Option<&mut Trace>) -> Vec<f64> {
        let cfg = &self.config;
        let (c, w, l) = (cfg.channels(), cfg.width, cfg.cond_tokens);
        let (nb, np) = (batch.len(), batch.positions());
        let rows = nb * np;
        let ly = &self.layout;

        let x_rows = to_rows(batch.x, nb, c, np);
        let mut h = nn::linear(&x_rows, rows, self.p(&ly.in_w), Some(self.p(&ly.in_b)), c, w);

        let temb_raw: Vec<f64> = batch.t.iter().flat_map(|&t| nn::sinusoidal(t as f64, w)).collect();
        let tm_pre = nn::linear(&temb_raw, nb, self.p(&ly.time_w), Some(self.p(&ly.time_b)), w, w);
        let tm = nn::silu(&tm_pre);

        let (tokens, feats): (Vec<Vec<f64>>, Vec<Vec<f64>>) =
            batch.conds.iter().map(|cd| self.tokens_and_features(cd)).unzip();

        let mut block_traces = Vec::new();
        for bp in &ly.blocks {
            let (ln_out, ln_stats) = nn::layer_norm(&h, w, self.p(&bp.ln_g), self.p(&bp.ln_b));
            let u1 = per_sample_conv(&ln_out, batch, w, self.p(&bp.dw1), self.p(&bp.dw1_b));
            let mut u3 = nn::linear(&u1, rows, self.p(&bp.pw1), Some(self.p(&bp.pw1_b)), w, w);
            let tp = nn::linear(&tm, nb, self.p(&bp.temb_w), Some(self.p(&bp.temb_b)), w, w);
            for (b, sample) in u3.chunks_mut(np * w).enumerate() {
                for row in sample.chunks_mut(w) {
                    for (v, t) in row.iter_mut().zip(&tp[b * w..(b + 1) * w]) {
                        *v += t;
                    }
                }
            }
            let u4 = nn::silu(&u3);
            let q = nn::linear(&u4, rows, self.p(&bp.wq), None, w, w);
            let keys: Vec<Vec<f64>> = tokens.iter().map(|t| nn::linear(t, l, self.p(&bp.wk), None, cfg.cond_dim, w)).collect();
            let values: Vec<Vec<f64>> = tokens.iter().map(|t| nn::linear(t, l, self.p(&bp.wv), None, cfg.cond_dim, w)).collect();
            let (o, probs) = self.attention(&q, &keys, &values, batch);
            let mut u5 = nn::linear(&o, rows, self.p(&bp.wo), Some(self.p(&bp.wo_b)), w, w);
            for (v, u) in u5.iter_mut().zip(&u4) {
                *v += u;
            }
            let u6 = nn::silu(&u5);
            let u7 = per_sample_conv(&u6, batch, w, self.p(&bp.dw2), self.p(&bp.dw2_b));
            let r = nn::linear(&u7, rows, self.p(&bp.pw2), Some(self.p(&bp.pw2_b)), w, w);
            let h_in = if trace.is_some() { h.clone() } else { Vec::new() };
            for (v, d) in h.iter_mut().zip(&r) {
                *v += d;
            }
            if trace.is_some() {
                block_traces.push(BlockTrace {
                    h_in,
                    ln_stats,
                    u0: ln_out,
                    u1,
                    u3,
                    u4,
                    q,
                    keys,
                    values,
                    probs,
                    o,
                    u5,
                    u6,
                    u7,
                });
            }
        }

        let (f0, out_stats) = nn::layer_norm(&h, w, self.p(&ly.out_ln_g), self.p(&ly.out_ln_b));
        let f1 = nn::silu(&f0);
        let out_rows = nn::linear(&f1, rows, self.p(&ly.out_w), Some(self.p(&ly.out_b)), w, c);
        let out = from_rows(&out_rows, nb, c, np);

        if let Some(tr) = trace {
            *tr = Trace {
                rows: x_rows,
                temb_raw,
                tm_pre,
                tm,
                tokens,
                feats,
                blocks: block_traces,
                h_final: h,
                out_stats,
                f0,
                f1,
            };
        }
        out
    }

    /// Multi-head attention from position rows onto each sample's condition tokens.
    /// Returns the attended rows and the softmax weights (`rows × heads × L`).
    fn attention(&self, q: &[f64], keys: &[Vec<f64>], values: &[Vec<f64>], batch: &Batch) -> (Vec<f64>, Vec<f64>) {
        let (w, l, nh) = (self.config.width, self.config.cond_tokens, self.config.heads);
        let dh = w / nh;
        let np = batch.positions();
        let scale = 1.0 / (dh as f64).sqrt();
        let per_sample = exec::map_indexed(batch.len(), |b| {
            let (k, v) = (&keys[batch.cond_of[b]], &values[batch.cond_of[b]]);
            let mut o = vec![0.0; np * w];
            let mut probs = vec![0.0; np * nh * l];
            for p in 0..np {
                let qr = &q[(b * np + p) * w..(b * np + p + 1) * w];
                for h in 0..nh {
                    let pr = &mut probs[(p * nh + h) * l..(p * nh + h + 1) * l];
                    let mut max = f64::NEG_INFINITY;
                    for (j, s) in pr.iter_mut().enumerate() {
                        *s = scale * (0..dh).map(|i| qr[h * dh + i] * k[j * w + h * dh + i]).sum::<f64>();
                        max = max.max(*s);
                    }
                    let mut z = 0.0;
                    for s in pr.iter_mut() {
                        *s = (*s - max).exp();
                        z += *s;
                    }
                    pr.iter_mut().for_each(|s| *s /= z);
                    let orow = &mut o[p * w + h * dh..p * w + (h + 1) * dh];
                    for (j, &a) in pr.iter().enumerate() {
                        for i in 0..dh {
                            orow[i] += a * v[j * w + h * dh + i];
                        }
                    }
                }
            }
            (o, probs)
        });
        let mut o = Vec::with_capacity(batch.len() * np * w);
        let mut probs = Vec::with_capacity(batch.len() * np * nh * l);
        for (so, sp) in per_sample {
            o.extend(so);
            probs.extend(sp);
        }
        (o, probs)
    }

    fn backward(&self, batch: &Batch, tr: &Trace, dout: &[f64]) -> Vec<f64> {
        let cfg = &self.config;
        let (c, w, l, d, nh) = (cfg.channels(), cfg.width, cfg.cond_tokens, cfg.cond_dim, cfg.heads);
        let dh = w / nh;
        let (nb, np) = (batch.len(), batch.positions());
        let rows = nb * np;
        let ly = &self.layout;
        let mut g = vec![0.0; self.params.len()];

        // Output head.
        let dout_rows = to_rows(dout, nb, c, np);
        let df1 = {
            let (dw, db) = split2(&mut g, &ly.out_w, &ly.out_b);
            nn::linear_backward(&tr.f1, &dout_rows, rows, self.p(&ly.out_w), w, c, dw, Some(db), true).unwrap()
        };
        let df0 = nn::silu_backward(&tr.f0, &df1);
        let mut dh_acc = {
            let (dg, db) = split2(&mut g, &ly.out_ln_g, &ly.out_ln_b);
            nn::layer_norm_backward(&tr.h_final, &df0, w, &tr.out_stats, self.p(&ly.out_ln_g), dg, db)
        };

        let mut dtm = vec![0.0; nb * w];
        let mut dtokens: Vec<Vec<f64>> = tr.tokens.iter().map(|t| vec![0.0; t.len()]).collect();

        for (bp, bt) in ly.blocks.iter().zip(&tr.blocks).rev() {
            // h_out = h_in + pw2(dw2(u6)).
            let du7 = {
                let (dw, db) = split2(&mut g, &bp.pw2, &bp.pw2_b);
                nn::linear_backward(&bt.u7, &dh_acc, rows, self.p(&bp.pw2), w, w, dw, Some(db), true).unwrap()
            };
            let du6 = {
                let (dw, db) = split2(&mut g, &bp.dw2, &bp.dw2_b);
                per_sample_conv_backward(&bt.u6, &du7, batch, w, self.p(&bp.dw2), dw, db)
            };
            let du5 = nn::silu_backward(&bt.u5, &du6);

            // u5 = u4 + Wo·attn + b.
            let d_o = {
                let (dw, db) = split2(&mut g, &bp.wo, &bp.wo_b);
                nn::linear_backward(&bt.o, &du5, rows, self.p(&bp.wo), w, w, dw, Some(db), true).unwrap()
            };
            let mut du4 = du5;

            // Attention.
            let scale = 1.0 / (dh as f64).sqrt();
            let per_sample = exec::map_indexed(nb, |b| {
                let ci = batch.cond_of[b];
                let (k, v) = (&bt.keys[ci], &bt.values[ci]);
                let mut dq = vec![0.0; np * w];
                let mut dk = vec![0.0; l * w];
                let mut dv = vec![0.0; l * w];
                let mut dpr = vec![0.0; l];
                for p in 0..np {
                    let row = b * np + p;
                    let qr = &bt.q[row * w..(row + 1) * w];
                    let dor = &d_o[row * w..(row + 1) * w];
                    for h in 0..nh {
                        let pr = &bt.probs[(row * nh + h) * l..(row * nh + h + 1) * l];
                        for j in 0..l {
                            let mut s = 0.0;
                            for i in 0..dh {
                                let gi = dor[h * dh + i];
                                s += gi * v[j * w + h * dh + i];
                                dv[j * w + h * dh + i] += pr[j] * gi;
                            }
                            dpr[j] = s;
                        }
                        let dot: f64 = pr.iter().zip(&dpr).map(|(a, b)| a * b).sum();
                        for j in 0..l {
                            let ds = pr[j] * (dpr[j] - dot) * scale;
                            for i in 0..dh {
                                dq[p * w + h * dh + i] += ds * k[j * w + h * dh + i];
                                dk[j * w + h * dh + i] += ds * qr[h * dh + i];
                            }
                        }
                    }
                }
                (dq, dk, dv)
            });
            let mut dq = Vec::with_capacity(rows * w);
            let mut dkeys: Vec<Vec<f64>> = tr.tokens.iter().map(|_| vec![0.0; l * w]).collect();
            let mut dvalues = dkeys.clone();
            for (b, (sq, sk, sv)) in per_sample.into_iter().enumerate() {
                dq.extend(sq);
                let ci = batch.cond_of[b];
                add_into(&mut dkeys[ci], &sk);
                add_into(&mut dvalues[ci], &sv);
            }
            let du4_q = nn::linear_backward(&bt.u4, &dq, rows, self.p(&bp.wq), w, w, &mut g[bp.wq.clone()], None, true).unwrap();
            add_into(&mut du4, &du4_q);
            for ci in 0..tr.tokens.len() {
                let tk = nn::linear_backward(&tr.tokens[ci], &dkeys[ci], l, self.p(&bp.wk), d, w, &mut g[bp.wk.clone()], None, true).unwrap();
                add_into(&mut dtokens[ci], &tk);
                let tv = nn::linear_backward(&tr.tokens[ci], &dvalues[ci], l, self.p(&bp.wv), d, w, &mut g[bp.wv.clone()], None, true).unwrap();
                add_into(&mut dtokens[ci], &tv);
            }

            // u4 = silu(u3); u3 = pw1(u1) + time projection.
            let du3 = nn::silu_backward(&bt.u3, &du4);
            let mut dtp = vec![0.0; nb * w];
            for (b, sample) in du3.chunks(np * w).enumerate() {
                for row in sample.chunks(w) {
                    add_into(&mut dtp[b * w..(b + 1) * w], row);
                }
            }
            let dtm_b = {
                let (dw, db) = split2(&mut g, &bp.temb_w, &bp.temb_b);
                nn::linear_backward(&tr.tm, &dtp, nb, self.p(&bp.temb_w), w, w, dw, Some(db), true).unwrap()
            };
            add_into(&mut dtm, &dtm_b);
            let du1 = {
                let (dw, db) = split2(&mut g, &bp.pw1, &bp.pw1_b);
                nn::linear_backward(&bt.u1, &du3, rows, self.p(&bp.pw1), w, w, dw, Some(db), true).unwrap()
            };
            let du0 = {
                let (dw, db) = split2(&mut g, &bp.dw1, &bp.dw1_b);
                per_sample_conv_backward(&bt.u0, &du1, batch, w, self.p(&bp.dw1), dw, db)
            };
            let dh_ln = {
                let (dg, db) = split2(&mut g, &bp.ln_g, &bp.ln_b);
                nn::layer_norm_backward(&bt.h_in, &du0, w, &bt.ln_stats, self.p(&bp.ln_g), dg, db)
            };
            add_into(&mut dh_acc, &dh_ln);
        }

        // Input projection.
        {
            let (dw, db) = split2(&mut g, &ly.in_w, &ly.in_b);
            nn::linear_backward(&tr.rows, &dh_acc, rows, self.p(&ly.in_w), c, w, dw, Some(db), false);
        }
        // Time embedding MLP.
        {
            let dpre = nn::silu_backward(&tr.tm_pre, &dtm);
            let (dw, db) = split2(&mut g, &ly.time_w, &ly.time_b);
            nn::linear_backward(&tr.temb_raw, &dpre, nb, self.p(&ly.time_w), w, w, dw, Some(db), false);
        }
        // Condition encoder.
        let f2 = 2 * cfg.value_features;
        for (ci, cond) in batch.conds.iter().enumerate() {
            let dt = &dtokens[ci];
            let ti = cond.task_index();
            add_into(&mut g[ly.task_emb.start + ti * d..ly.task_emb.start + (ti + 1) * d], &dt[..d]);
            if cond.is_null() {
                add_into(&mut g[ly.null_seq.clone()], &dt[d..]);
            } else {
                let (dw, db) = split2(&mut g, &ly.val_w, &ly.val_b);
                nn::linear_backward(&tr.feats[ci], &dt[d..], 1, self.p(&ly.val_w), f2, (l - 1) * d, dw, Some(db), false);
            }
        }
        g
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (a, b) in dst.iter_mut().zip(src) {
        *a += b;
    }
}

/// Two disjoint mutable parameter ranges.
fn split2<'a>(g: &'a mut [f64], a: &Range<usize>, b: &Range<usize>) -> (&'a mut [f64], &'a mut [f64]) {
    assert!(a.end <= b.start, "ranges must be ordered and disjoint");
    let (lo, hi) = g.split_at_mut(b.start);
    (&mut lo[a.clone()], &mut hi[..b.len()])
}

/// Channel-major samples → position rows.
fn to_rows(x: &[f64], nb: usize, c: usize, np: usize) -> Vec<f64> {
    let mut rows = vec![0.0; x.len()];
    for b in 0..nb {
        let s = &x[b * c * np..(b + 1) * c * np];
        let r = &mut rows[b * c * np..(b + 1) * c * np];
        for ch in 0..c {
            for p in 0..np {
                r[p * c + ch] = s[ch * np + p];
            }
        }
    }
    rows
}

fn from_rows(rows: &[f64], nb: usize, c: usize, np: usize) -> Vec<f64> {
    let mut x = vec![0.0; rows.len()];
    for b in 0..nb {
        let r = &rows[b * c * np..(b + 1) * c * np];
        let s = &mut x[b * c * np..(b + 1) * c * np];
        for p in 0..np {
            for ch in 0..c {
                s[ch * np + p] = r[p * c + ch];
            }
        }
    }
    x
}

fn per_sample_conv(x: &[f64], batch: &Batch, w: usize, taps: &[f64], bias: &[f64]) -> Vec<f64> {
    let per = batch.positions() * w;
    let mut y = vec![0.0; x.len()];
    exec::for_each_chunk_mut(&mut y, per, |b, out| {
        let conv = nn::depthwise_conv(&x[b * per..(b + 1) * per], batch.num_qubits, batch.slots, w, taps, bias);
        out.copy_from_slice(&conv);
    });
    y
}

fn per_sample_conv_backward(
    x: &[f64],
    dy: &[f64],
    batch: &Batch,
    w: usize,
    taps: &[f64],
    dtaps: &mut [f64],
    dbias: &mut [f64],
) -> Vec<f64> {
    let per = batch.positions() * w;
    let parts = exec::map_indexed(batch.len(), |b| {
        let mut dt = vec![0.0; taps.len()];
        let mut db = vec![0.0; w];
        let dx = nn::depthwise_conv_backward(
            &x[b * per..(b + 1) * per],
            &dy[b * per..(b + 1) * per],
            batch.num_qubits,
            batch.slots,
            w,
            taps,
            &mut dt,
            &mut db,
        );
        (dx, dt, db)
    });
    let mut dx = Vec::with_capacity(x.len());
    for (sx, st, sb) in parts {
        dx.extend(sx);
        add_into(dtaps, &st);
        add_into(dbias, &sb);
    }
    dx
}
