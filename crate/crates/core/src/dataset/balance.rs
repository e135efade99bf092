use serde::{Deserialize, Serialize};

use crate::circuit::GateSetId;
use crate::error::{Error, Result};

/// Target composition of a corpus: a share of high-label circuits of any length, the rest
/// low-label circuits spread evenly across gate-count bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceSpec {
    pub high_threshold: f64,
    /// `true`: high means `value >= threshold`; `false`: `value > threshold`.
    #[serde(default)]
    pub high_inclusive: bool,
    pub high_fraction: f64,
    pub min_gates: usize,
    pub max_gates: usize,
    pub low_length_bins: Vec<(usize, usize)>,
}

impl BalanceSpec {
    pub fn for_gateset(id: GateSetId) -> Self {
        match id {
            GateSetId::Gs1 => Self::with_range(0.9, false, 0.75, 3, 16),
            GateSetId::Gs2 => Self::with_range(0.9, false, 0.90, 3, 24),
            GateSetId::Ml => Self::with_range(0.7, true, 0.50, 3, 24),
        }
    }

    /// Four contiguous near-equal bins over `min..=max`, wider bins first.
    pub fn with_range(high_threshold: f64, high_inclusive: bool, high_fraction: f64, min_gates: usize, max_gates: usize) -> Self {
        BalanceSpec {
            high_threshold,
            high_inclusive,
            high_fraction,
            min_gates,
            max_gates,
            low_length_bins: even_bins(min_gates, max_gates, 4),
        }
    }

    pub fn is_high(&self, value: f64) -> bool {
        if self.high_inclusive {
            value >= self.high_threshold
        } else {
            value > self.high_threshold
        }
    }

    pub fn bin_of(&self, gate_count: usize) -> Option<usize> {
        self.low_length_bins
            .iter()
            .position(|&(lo, hi)| (lo..=hi).contains(&gate_count))
    }

    /// High-label quota and per-bin low-label quotas for a corpus of `count` records.
    pub fn quotas(&self, count: usize) -> (usize, Vec<usize>) {
        let high = ((self.high_fraction * count as f64).ceil() as usize).min(count);
        let low = count - high;
        let bins = self.low_length_bins.len();
        let per = low / bins;
        let extra = low % bins;
        let lows = (0..bins).map(|b| per + usize::from(b < extra)).collect();
        (high, lows)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("balance spec: {m}")));
        if !(0.0..=1.0).contains(&self.high_fraction) {
            return bad("high_fraction must lie in [0, 1]");
        }
        if self.min_gates > self.max_gates {
            return bad("min_gates exceeds max_gates");
        }
        if self.low_length_bins.is_empty() {
            return bad("at least one length bin is required");
        }
        let mut next = self.min_gates;
        for &(lo, hi) in &self.low_length_bins {
            if lo != next || hi < lo {
                return bad("length bins must tile the gate range in order without gaps or overlap");
            }
            next = hi + 1;
        }
        if next != self.max_gates + 1 {
            return bad("length bins must end at max_gates");
        }
        Ok(())
    }
}

fn even_bins(min: usize, max: usize, bins: usize) -> Vec<(usize, usize)> {
    let width = max + 1 - min;
    let bins = bins.min(width).max(1);
    let mut out = Vec::with_capacity(bins);
    let mut lo = min;
    for b in 0..bins {
        let w = width / bins + usize::from(b < width % bins);
        out.push((lo, lo + w - 1));
        lo += w;
    }
    out
}
