use rand::Rng;
use serde::{Deserialize, Serialize};

use super::balance::BalanceSpec;
use super::optimize::{optimize_params, Objective, Scorer};
use super::structure::{ghz_skeleton, random_placement, sample_structure, usable_kinds};
use super::TaskKind;
use crate::circuit::{Circuit, GateSet, GateSetId};
use crate::error::{Error, Result};
use crate::qsim::ClassifierTask;
use crate::{exec, rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Random,
    Optimized,
    Imported,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledCircuit {
    pub circuit: Circuit,
    pub task: TaskKind,
    pub value: f64,
    pub gate_count: usize,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub task: TaskKind,
    pub gateset: GateSetId,
    pub num_qubits: usize,
    pub count: usize,
    pub balance: BalanceSpec,
    pub seed: u64,
    /// Candidates deeper than this many slots are discarded.
    #[serde(default)]
    pub max_depth: Option<usize>,
    /// Share of GHZ candidates grown from the GHZ skeleton.
    pub skeleton_fraction: f64,
    /// Share of purely random candidates that get their parameters optimized.
    pub optimize_fraction: f64,
    /// Candidate budget as a multiple of `count`.
    pub budget_factor: usize,
    /// Classifier used to label `ml` circuits; defaults to [`ClassifierTask::default_task`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<ClassifierTask>,
}

impl CorpusConfig {
    pub fn new(task: TaskKind, gateset: GateSetId, num_qubits: usize, count: usize, seed: u64) -> Self {
        CorpusConfig {
            task,
            gateset,
            num_qubits,
            count,
            balance: BalanceSpec::for_gateset(gateset),
            seed,
            max_depth: None,
            skeleton_fraction: 0.6,
            optimize_fraction: 0.5,
            budget_factor: 100,
            classifier: None,
        }
    }

    pub fn objective(&self) -> Objective {
        match self.task {
            TaskKind::Ghz => Objective::Ghz,
            TaskKind::Ml => Objective::Ml(
                self.classifier
                    .clone()
                    .unwrap_or_else(ClassifierTask::default_task),
            ),
        }
    }
}

const CANDIDATE_STREAM: u64 = 0xC0_8905;
const CHUNK: usize = 128;

fn candidate(config: &CorpusConfig, gateset: &GateSet, scorer: &Scorer, objective: &Objective, index: usize) -> Option<LabeledCircuit> {
    let mut rng = rng::derived(config.seed, CANDIDATE_STREAM, index as u64);
    let n = config.num_qubits;
    let (lo, hi) = (config.balance.min_gates, config.balance.max_gates);
    let skeleton = ghz_skeleton(config.gateset, n);
    let use_skeleton = config.task == TaskKind::Ghz
        && skeleton.len() <= hi
        && rng.gen::<f64>() < config.skeleton_fraction;

    let (circuit, provenance) = if use_skeleton {
        let count = rng.gen_range(lo.max(skeleton.len())..=hi);
        let kinds = usable_kinds(gateset, n);
        let mut gates = skeleton;
        for _ in gates.len()..count {
            let at = rng.gen_range(0..=gates.len());
            gates.insert(at, random_placement(&kinds, n, &mut rng));
        }
        let c = Circuit::pack(n, gates);
        if c.params().is_empty() {
            (c, Provenance::Random)
        } else {
            (optimize_params(&c, objective), Provenance::Optimized)
        }
    } else {
        let count = rng.gen_range(lo..=hi);
        let c = sample_structure(gateset, n, count, &mut rng);
        if rng.gen::<f64>() < config.optimize_fraction && !c.params().is_empty() {
            (optimize_params(&c, objective), Provenance::Optimized)
        } else {
            (c, Provenance::Random)
        }
    };
    if config.max_depth.is_some_and(|d| circuit.depth() > d) {
        return None;
    }
    let value = scorer.score(&circuit);
    Some(LabeledCircuit {
        gate_count: circuit.gate_count(),
        circuit,
        task: config.task,
        value,
        provenance,
    })
}

/// Draws candidates until the balance quotas are met.
///
/// Candidates are generated in parallel chunks from per-index random streams and accepted in
/// index order, so the corpus depends only on the configuration.
pub fn build_corpus(config: &CorpusConfig) -> Result<Vec<LabeledCircuit>> {
    if config.count == 0 {
        return Err(Error::Config("corpus count must be at least 1".into()));
    }
    config.balance.check()?;
    let gateset = GateSet::new(config.gateset);
    if config.num_qubits < gateset.max_arity() {
        return Err(Error::Config(format!(
            "{} needs at least {} qubits",
            gateset.id(),
            gateset.max_arity()
        )));
    }
    let objective = config.objective();
    let scorer = Scorer::new(&objective, config.num_qubits);
    let (mut high_left, mut bins_left) = config.balance.quotas(config.count);
    let budget = config.budget_factor.max(1) * config.count;
    let mut corpus = Vec::with_capacity(config.count);
    let mut next = 0usize;
    while corpus.len() < config.count {
        if next >= budget {
            return Err(Error::Balance {
                candidates: next,
                detail: format!(
                    "still missing {high_left} high-label records and {bins_left:?} low-label records per length bin {:?}",
                    config.balance.low_length_bins
                ),
            });
        }
        let batch = CHUNK.min(budget - next);
        let drawn = exec::map_indexed(batch, |i| candidate(config, &gateset, &scorer, &objective, next + i));
        next += batch;
        for c in drawn.into_iter().flatten() {
            if config.balance.is_high(c.value) {
                if high_left > 0 {
                    high_left -= 1;
                    corpus.push(c);
                }
            } else if let Some(b) = config.balance.bin_of(c.gate_count) {
                if bins_left[b] > 0 {
                    bins_left[b] -= 1;
                    corpus.push(c);
                }
            }
            if corpus.len() == config.count {
                break;
            }
        }
    }
    Ok(corpus)
}
