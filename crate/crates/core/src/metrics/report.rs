use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateSet};
use crate::codec::{decode, CircuitTensor, DecodeErrorKind, DecodeOutcome, EmbeddingTable};
use crate::dataset::{Objective, Scorer, TaskKind};
use crate::exec;
use crate::qsim::ClassifierTask;

pub const REPORT_VERSION: u32 = 1;
pub const HISTOGRAM_BINS: usize = 20;
pub const HISTOGRAM_WIDTH: f64 = 0.05;

/// When a decoded sample counts as reaching the target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Threshold {
    /// `value ≥ min`.
    AtLeast { min: f64 },
    /// `|value − target| ≤ tolerance`.
    Within { target: f64, tolerance: f64 },
}

impl Threshold {
    /// Fidelity ≥ 0.99 for GHZ; accuracy within ±0.05 of `target` for ML.
    pub fn default_for(task: TaskKind, target: f64) -> Self {
        match task {
            TaskKind::Ghz => Threshold::AtLeast { min: 0.99 },
            TaskKind::Ml => Threshold::Within {
                target,
                tolerance: 0.05,
            },
        }
    }

    pub fn accepts(&self, value: f64) -> bool {
        match *self {
            Threshold::AtLeast { min } => value >= min,
            Threshold::Within { target, tolerance } => (value - target).abs() <= tolerance + 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub task: TaskKind,
    pub threshold: Threshold,
    pub num_qubits: usize,
    pub max_gates: usize,
    /// Classifier used for `ml`; defaults to [`ClassifierTask::default_task`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<ClassifierTask>,
}

impl EvalConfig {
    pub fn new(task: TaskKind, threshold: Threshold, num_qubits: usize, max_gates: usize) -> Self {
        EvalConfig {
            task,
            threshold,
            num_qubits,
            max_gates,
            classifier: None,
        }
    }

    fn objective(&self) -> Objective {
        match self.task {
            TaskKind::Ghz => Objective::Ghz,
            TaskKind::Ml => Objective::Ml(self.classifier.clone().unwrap_or_else(ClassifierTask::default_task)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SampleStatus {
    Decoded,
    Error { kind: DecodeErrorKind, slot: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    #[serde(flatten)]
    pub status: SampleStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structural_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_key: Option<String>,
    /// Share of the sampling wall time attributed to this sample.
    pub gen_time_s: f64,
    /// Decode wall time.
    pub conv_time_s: f64,
}

impl SampleRecord {
    pub fn is_decoded(&self) -> bool {
        self.status == SampleStatus::Decoded
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub sample_count: usize,
    pub decoded_count: usize,
    pub error_count: usize,
    pub high_count: usize,
    pub unique_structures: usize,
    pub unique_hashes: usize,
    /// Mean task value over decoded samples.
    pub mean_value: Option<f64>,
    /// `histogram[i]` counts decoded values in `[0.05·i, 0.05·(i+1))`; 1.0 falls in the last bin.
    pub histogram: Vec<usize>,
    pub gen_time_s: f64,
    pub conv_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub config: EvalConfig,
    pub records: Vec<SampleRecord>,
    pub aggregates: Aggregates,
}

impl EvalReport {
    /// Rebuilds the aggregates from the per-sample records.
    pub fn recompute_aggregates(&self) -> Aggregates {
        aggregate(&self.records, &self.config.threshold)
    }

    /// Share of all samples (decode errors included) whose value is at least `min`.
    pub fn fraction_at_least(&self, min: f64) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let n = self.records.iter().filter(|r| r.value.is_some_and(|v| v >= min)).count();
        n as f64 / self.records.len() as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        let report: EvalReport = serde_json::from_str(s)?;
        if report.version != REPORT_VERSION {
            return Err(crate::Error::Config(format!("unsupported report version {}", report.version)));
        }
        Ok(report)
    }
}

pub fn histogram_bin(value: f64) -> usize {
    ((value.clamp(0.0, 1.0) * HISTOGRAM_BINS as f64).floor() as usize).min(HISTOGRAM_BINS - 1)
}

pub fn aggregate(records: &[SampleRecord], threshold: &Threshold) -> Aggregates {
    let mut histogram = vec![0; HISTOGRAM_BINS];
    let mut structures = BTreeSet::new();
    let mut hashes = BTreeSet::new();
    let (mut decoded, mut high, mut sum) = (0, 0, 0.0);
    for r in records.iter().filter(|r| r.is_decoded()) {
        decoded += 1;
        let Some(v) = r.value else { continue };
        sum += v;
        histogram[histogram_bin(v)] += 1;
        if threshold.accepts(v) {
            high += 1;
            structures.insert(r.structural_key.as_deref().unwrap_or(""));
            hashes.insert(r.param_key.as_deref().unwrap_or(""));
        }
    }
    Aggregates {
        sample_count: records.len(),
        decoded_count: decoded,
        error_count: records.len() - decoded,
        high_count: high,
        unique_structures: structures.len(),
        unique_hashes: hashes.len(),
        mean_value: (decoded > 0).then(|| sum / decoded as f64),
        histogram,
        gen_time_s: records.iter().map(|r| r.gen_time_s).sum(),
        conv_time_s: records.iter().map(|r| r.conv_time_s).sum(),
    }
}

/// Scores already-decoded outcomes. `gen_time_s` is the total sampling time, spread evenly.
pub fn evaluate_outcomes(outcomes: &[(DecodeOutcome, f64)], config: &EvalConfig, gen_time_s: f64) -> EvalReport {
    let objective = config.objective();
    let scorer = Scorer::new(&objective, config.num_qubits);
    let share = if outcomes.is_empty() { 0.0 } else { gen_time_s / outcomes.len() as f64 };
    let indexed: Vec<(usize, &(DecodeOutcome, f64))> = outcomes.iter().enumerate().collect();
    let records = exec::map_slice(&indexed, |&(index, (outcome, conv))| match outcome {
        Ok(c) => decoded_record(index, c, &scorer, share, *conv),
        Err(e) => SampleRecord {
            index,
            status: SampleStatus::Error { kind: e.kind, slot: e.slot },
            value: None,
            gate_count: None,
            structural_key: None,
            param_key: None,
            gen_time_s: share,
            conv_time_s: *conv,
        },
    });
    let aggregates = aggregate(&records, &config.threshold);
    EvalReport {
        version: REPORT_VERSION,
        config: config.clone(),
        records,
        aggregates,
    }
}

fn decoded_record(index: usize, c: &Circuit, scorer: &Scorer, gen: f64, conv: f64) -> SampleRecord {
    SampleRecord {
        index,
        status: SampleStatus::Decoded,
        value: Some(scorer.score(c)),
        gate_count: Some(c.gate_count()),
        structural_key: Some(c.structural_key()),
        param_key: Some(c.param_key()),
        gen_time_s: gen,
        conv_time_s: conv,
    }
}

/// Decodes, scores and aggregates one sampling run.
pub fn evaluate(
    tensors: &[CircuitTensor],
    table: &EmbeddingTable,
    gateset: &GateSet,
    config: &EvalConfig,
    gen_time_s: f64,
) -> EvalReport {
    let outcomes = exec::map_slice(tensors, |t| {
        let start = Instant::now();
        let out = decode(t, table, gateset);
        (out, start.elapsed().as_secs_f64())
    });
    evaluate_outcomes(&outcomes, config, gen_time_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Placement, GateKind};
    use crate::codec::{build_table, encode, DecodeError};

    fn ghz_config() -> EvalConfig {
        EvalConfig::new(TaskKind::Ghz, Threshold::default_for(TaskKind::Ghz, 1.0), 3, 8)
    }

    fn ghz_with_rz(theta: f64) -> Circuit {
        let mut gates = vec![
            Placement::single(GateKind::H, 0),
            Placement::two(GateKind::Cx, 0, 1),
            Placement::two(GateKind::Cx, 1, 2),
        ];
        gates.push(Placement::rotation(GateKind::Rz, 0, theta));
        Circuit::pack(3, gates)
    }

    /// Two circuits sharing a structure with different angles, one distinct, plus one decode error.
    fn fixture() -> Vec<(DecodeOutcome, f64)> {
        let a = ghz_with_rz(0.0);
        let b = ghz_with_rz(2.0 * std::f64::consts::PI - 1e-9);
        let c = Circuit::ghz_canonical(3);
        let err = DecodeError {
            kind: DecodeErrorKind::UnpairedRole,
            slot: 1,
            qubits: vec![0],
        };
        vec![(Ok(a), 0.0), (Ok(b), 0.0), (Ok(c), 0.0), (Err(err), 0.0)]
    }

    #[test]
    fn uniqueness_fixture() {
        let report = evaluate_outcomes(&fixture(), &ghz_config(), 4.0);
        let a = &report.aggregates;
        assert_eq!(a.sample_count, 4);
        assert_eq!(a.error_count, 1);
        assert_eq!(a.decoded_count, 3);
        assert_eq!(a.high_count, 3);
        assert_eq!(a.unique_structures, 2);
        assert_eq!(a.unique_hashes, 3);
        assert_eq!(a.histogram[HISTOGRAM_BINS - 1], 3);
        assert_eq!(a.histogram.iter().sum::<usize>(), 3);
        assert!((a.gen_time_s - 4.0).abs() < 1e-12);
        assert!(report.records[3].value.is_none());
    }

    #[test]
    fn uniqueness_only_over_high_samples() {
        let mut outcomes = fixture();
        outcomes.push((Ok(Circuit::pack(3, vec![Placement::single(GateKind::H, 0)])), 0.0));
        let report = evaluate_outcomes(&outcomes, &ghz_config(), 0.0);
        assert_eq!(report.aggregates.high_count, 3);
        assert_eq!(report.aggregates.unique_structures, 2);
        assert_eq!(report.aggregates.histogram[histogram_bin(0.25)], 1);
        assert!((report.fraction_at_least(0.9) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn json_roundtrip_and_recompute() {
        let report = evaluate_outcomes(&fixture(), &ghz_config(), 1.5);
        let back = EvalReport::from_json(&report.to_json()).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.recompute_aggregates(), report.aggregates);
        let mut bad = report.clone();
        bad.version = 99;
        assert!(EvalReport::from_json(&bad.to_json()).is_err());
    }

    #[test]
    fn evaluate_tensors() {
        let gs = GateSet::gs1();
        let table = build_table(&gs, 16, 1).unwrap();
        let mut bad = encode(&Circuit::ghz_canonical(3), &table, 4).unwrap();
        // Erase the target of the first cx: its control is left unpaired.
        for c in 0..table.dim {
            bad.set(c, 1, 1, table.vectors[0][c]);
        }
        let tensors = vec![encode(&Circuit::ghz_canonical(3), &table, 4).unwrap(), bad];
        let report = evaluate(&tensors, &table, &gs, &ghz_config(), 0.0);
        assert_eq!(report.aggregates.error_count, 1);
        assert_eq!(report.aggregates.high_count, 1);
        assert!(matches!(
            report.records[1].status,
            SampleStatus::Error { kind: DecodeErrorKind::UnpairedRole, .. }
        ));
    }

    #[test]
    fn thresholds() {
        let ml = Threshold::default_for(TaskKind::Ml, 0.8);
        assert!(ml.accepts(0.75) && ml.accepts(0.85) && !ml.accepts(0.7));
        let ghz = Threshold::default_for(TaskKind::Ghz, 1.0);
        assert!(ghz.accepts(0.99) && !ghz.accepts(0.9899));
        assert_eq!(histogram_bin(1.0), HISTOGRAM_BINS - 1);
        assert_eq!(histogram_bin(0.0), 0);
        assert_eq!(histogram_bin(0.05), 1);
    }
}
