use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use pqcd_core::circuit::GateSet;
use pqcd_core::codec::{build_table, decode, read_tensors, write_tensors, TENSOR_MAGIC};
use pqcd_core::dataset::{build_corpus, read_corpus, write_corpus, BalanceSpec, CorpusConfig, LabeledCircuit, TaskKind};
use pqcd_core::diffusion::{
    self, Checkpoint, Condition, DenoiserConfig, SampleRequest, ScheduleConfig, TrainConfig, TrainData,
};
use pqcd_core::metrics::{emit, evaluate as evaluate_tensors, evaluate_outcomes, EvalConfig, EvalReport, Threshold};
use pqcd_core::GateSetId;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::records::{read_records, write_records, CircuitRecord};
use crate::{EvaluateArgs, Failure, GenerateArgs, ReportArgs, SampleArgs, TrainArgs};

type CmdResult = Result<(), Failure>;

fn require_file(path: &Path, what: &str) -> CmdResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{what} not found: {}", path.display())))
    }
}

fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

/// Writes `<artifact>.config.json` holding the resolved configuration of the run.
fn write_sidecar(artifact: &Path, command: &str, config: serde_json::Value) -> anyhow::Result<()> {
    let doc = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    let path = sidecar_path(artifact);
    fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn generate(a: &GenerateArgs) -> CmdResult {
    if a.count == 0 || a.qubits == 0 {
        return Err(Failure::Usage("--count and --qubits must be at least 1".into()));
    }
    let mut balance = match &a.balance {
        Some(p) => {
            require_file(p, "balance spec")?;
            let text = fs::read_to_string(p)?;
            serde_json::from_str::<BalanceSpec>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => BalanceSpec::for_gateset(a.gateset),
    };
    if a.min_gates.is_some() || a.max_gates.is_some() {
        let lo = a.min_gates.unwrap_or(balance.min_gates);
        let hi = a.max_gates.unwrap_or(balance.max_gates);
        if lo > hi {
            return Err(Failure::Usage(format!("--min-gates {lo} exceeds --max-gates {hi}")));
        }
        balance = BalanceSpec::with_range(balance.high_threshold, balance.high_inclusive, balance.high_fraction, lo, hi);
    }
    let mut config = CorpusConfig::new(a.task, a.gateset, a.qubits, a.count, a.seed);
    config.balance = balance;
    config.max_depth = a.max_depth;

    let start = Instant::now();
    let corpus = build_corpus(&config)?;
    write_corpus(&a.out, &corpus)?;
    write_sidecar(&a.out, "dataset generate", json!({ "out": a.out, "corpus": config }))?;
    let high = corpus.iter().filter(|r| config.balance.is_high(r.value)).count();
    eprintln!(
        "wrote {} records ({} high) to {} in {:.1}s",
        corpus.len(),
        high,
        a.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

/// Contents of `train --config`; every field is optional.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainRun {
    /// Inferred from the corpus when absent.
    pub gateset: Option<GateSetId>,
    /// Slots per circuit; the deepest corpus circuit when absent.
    pub slots: Option<usize>,
    pub embedding_dim: usize,
    pub embedding_seed: u64,
    pub schedule: ScheduleConfig,
    pub model: DenoiserConfig,
    pub hyper: TrainConfig,
}

impl Default for TrainRun {
    fn default() -> Self {
        TrainRun {
            gateset: None,
            slots: None,
            embedding_dim: 16,
            embedding_seed: 1,
            schedule: ScheduleConfig::default(),
            model: DenoiserConfig::default(),
            hyper: TrainConfig::default(),
        }
    }
}

fn infer_gateset(corpus: &[LabeledCircuit]) -> Option<GateSetId> {
    [GateSetId::Gs1, GateSetId::Gs2, GateSetId::Ml].into_iter().find(|&id| {
        let gs = GateSet::new(id);
        corpus.iter().all(|r| r.circuit.validate(&gs).is_ok())
    })
}

pub fn train(a: &TrainArgs) -> CmdResult {
    require_file(&a.data, "corpus")?;
    let mut run = match &a.config {
        Some(p) => {
            require_file(p, "training config")?;
            let text = fs::read_to_string(p)?;
            serde_json::from_str::<TrainRun>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => TrainRun::default(),
    };
    let corpus = read_corpus(&a.data, None)?;
    let first = corpus.first().ok_or_else(|| anyhow!("corpus {} is empty", a.data.display()))?;
    let num_qubits = first.circuit.num_qubits();
    let gateset = match run.gateset {
        Some(id) => id,
        None => infer_gateset(&corpus).ok_or_else(|| anyhow!("corpus does not fit any single gate set"))?,
    };
    let slots = run
        .slots
        .unwrap_or_else(|| corpus.iter().map(|r| r.circuit.depth()).max().unwrap_or(1).max(1));
    run.gateset = Some(gateset);
    run.slots = Some(slots);
    run.model.gate_dim = run.embedding_dim;

    let table = build_table(&GateSet::new(gateset), run.embedding_dim, run.embedding_seed)?;
    let schedule = run.schedule.build()?;
    let metrics_path = a.metrics.clone().unwrap_or_else(|| {
        let mut p = a.out.as_os_str().to_owned();
        p.push(".metrics.jsonl");
        PathBuf::from(p)
    });
    let mut metrics = BufWriter::new(File::create(&metrics_path).with_context(|| format!("creating {}", metrics_path.display()))?);
    let mut write_err = None;
    let start = Instant::now();
    let log_every = a.log_every.max(1);
    let outcome = diffusion::train(
        TrainData {
            corpus: &corpus,
            table: &table,
            schedule: &schedule,
            num_qubits,
            slots,
        },
        run.model.clone(),
        &run.hyper,
        |r| {
            if write_err.is_none() {
                if let Err(e) = serde_json::to_writer(&mut metrics, r).map_err(anyhow::Error::from).and_then(|()| {
                    metrics.write_all(b"\n")?;
                    Ok(())
                }) {
                    write_err = Some(e);
                }
            }
            if r.step % log_every == 0 || r.step + 1 == run.hyper.steps {
                eprintln!(
                    "step {:>6}  loss {:>10.4}  smoothed {:>10.4}  lr {:.3e}  {:.1}s",
                    r.step,
                    r.loss,
                    r.smoothed,
                    r.lr,
                    start.elapsed().as_secs_f64()
                );
            }
        },
    );
    metrics.flush()?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    let outcome = outcome?;
    let ckpt = Checkpoint::from_training(&outcome, &table, &schedule, &run.hyper, num_qubits, slots);
    ckpt.save(&a.out)?;
    write_sidecar(
        &a.out,
        "train",
        json!({ "data": a.data, "out": a.out, "metrics": metrics_path, "num_qubits": num_qubits, "run": run }),
    )?;
    eprintln!(
        "trained {} steps: smoothed loss {:.4} -> {:.4}; checkpoint {}",
        outcome.history.len(),
        outcome.initial_smoothed,
        outcome.final_smoothed,
        a.out.display()
    );
    Ok(())
}

pub fn sample(a: &SampleArgs) -> CmdResult {
    require_file(&a.ckpt, "checkpoint")?;
    if a.count == 0 {
        return Err(Failure::Usage("--count must be at least 1".into()));
    }
    if !(a.guidance >= 0.0 && a.guidance.is_finite()) {
        return Err(Failure::Usage("--guidance must be a finite value >= 0".into()));
    }
    let ckpt = Checkpoint::load(&a.ckpt)?;
    let denoiser = ckpt.denoiser()?;
    let table = ckpt.table()?;
    let schedule = ckpt.schedule()?;
    let gateset = GateSet::new(ckpt.header.gateset);
    let num_qubits = a.qubits.unwrap_or(ckpt.header.num_qubits);
    let slots = a.max_gates.unwrap_or(ckpt.header.slots);
    if num_qubits == 0 || slots == 0 {
        return Err(Failure::Usage("--qubits and --max-gates must be at least 1".into()));
    }
    let condition = Condition::new(a.task, a.target);
    eprintln!("prompt: {}", condition.prompt());
    if num_qubits != ckpt.header.num_qubits || slots != ckpt.header.slots {
        eprintln!(
            "zero-shot: sampling {num_qubits}x{slots}, trained on {}x{}",
            ckpt.header.num_qubits, ckpt.header.slots
        );
    }
    let request = SampleRequest {
        condition,
        guidance: a.guidance,
        count: a.count,
        num_qubits,
        slots,
        seed: a.seed,
    };
    let start = Instant::now();
    let tensors = diffusion::sample(&denoiser, &schedule, &request)?;
    let gen = start.elapsed().as_secs_f64();
    let shape = [ckpt.header.model.channels(), num_qubits, slots];
    write_tensors(&a.out, shape, &tensors)?;

    let decoded: Vec<_> = tensors
        .iter()
        .map(|t| {
            let s = Instant::now();
            let out = decode(t, &table, &gateset);
            (out, s.elapsed().as_secs_f64())
        })
        .collect();
    let errors = decoded.iter().filter(|(o, _)| o.is_err()).count();
    if let Some(path) = &a.circuits {
        let share = gen / tensors.len() as f64;
        let recs: Vec<CircuitRecord> = decoded
            .iter()
            .enumerate()
            .map(|(i, (o, conv))| CircuitRecord::new(i, num_qubits, slots, o, share, *conv))
            .collect();
        write_records(path, &recs)?;
    }
    let config = json!({
        "ckpt": a.ckpt,
        "prompt": condition.prompt(),
        "request": request,
        "out": a.out,
        "circuits": a.circuits,
    });
    write_sidecar(&a.out, "sample", config.clone())?;
    if let Some(path) = &a.circuits {
        write_sidecar(path, "sample", config)?;
    }
    eprintln!(
        "sampled {} tensors in {:.1}s; {} decode errors",
        tensors.len(),
        gen,
        errors
    );
    Ok(())
}

fn is_tensor_dump(path: &Path) -> anyhow::Result<bool> {
    let mut head = [0u8; 4];
    let mut f = File::open(path)?;
    let n = f.read(&mut head)?;
    Ok(n == 4 && &head == TENSOR_MAGIC)
}

pub fn evaluate(a: &EvaluateArgs) -> CmdResult {
    require_file(&a.input, "input")?;
    let threshold = match (a.task, a.threshold, a.target) {
        (_, Some(min), _) => Threshold::AtLeast { min },
        (TaskKind::Ghz, None, _) => Threshold::default_for(TaskKind::Ghz, 1.0),
        (TaskKind::Ml, None, Some(target)) => Threshold::Within {
            target,
            tolerance: a.tolerance,
        },
        (TaskKind::Ml, None, None) => {
            return Err(Failure::Usage("ml evaluation needs --target or --threshold".into()));
        }
    };
    let report = if is_tensor_dump(&a.input)? {
        let ckpt_path = a
            .ckpt
            .as_ref()
            .ok_or_else(|| Failure::Usage("evaluating a tensor dump needs --ckpt for the embedding table".into()))?;
        require_file(ckpt_path, "checkpoint")?;
        let ckpt = Checkpoint::load(ckpt_path)?;
        let table = ckpt.table()?;
        let (shape, tensors) = read_tensors(&a.input)?;
        let config = EvalConfig::new(a.task, threshold, shape[1], shape[2]);
        evaluate_tensors(&tensors, &table, &GateSet::new(ckpt.header.gateset), &config, 0.0)
    } else {
        let records = read_records(&a.input)?;
        let (n, slots) = records.first().map_or((0, 0), |r| (r.num_qubits, r.slots));
        let config = EvalConfig::new(a.task, threshold, n, slots);
        let gen: f64 = records.iter().map(|r| r.gen_time_s).sum();
        let outcomes: Vec<_> = records.iter().map(|r| (r.decode_outcome(), r.conv_time_s)).collect();
        evaluate_outcomes(&outcomes, &config, gen)
    };
    fs::write(&a.report, report.to_json() + "\n").with_context(|| format!("writing {}", a.report.display()))?;
    write_sidecar(
        &a.report,
        "evaluate",
        json!({ "in": a.input, "ckpt": a.ckpt, "config": report.config, "report": a.report }),
    )?;
    let g = &report.aggregates;
    eprintln!(
        "{} samples: {} errors, {} meet target, {} unique structures, {} unique hashes",
        g.sample_count, g.error_count, g.high_count, g.unique_structures, g.unique_hashes
    );
    Ok(())
}

pub fn report(a: &ReportArgs) -> CmdResult {
    let mut reports = Vec::with_capacity(a.inputs.len());
    for p in &a.inputs {
        require_file(p, "report")?;
        let text = fs::read_to_string(p)?;
        reports.push(EvalReport::from_json(&text).with_context(|| format!("reading {}", p.display()))?);
    }
    let doc = emit(&reports, a.format);
    match &a.out {
        Some(out) => {
            fs::write(out, &doc).with_context(|| format!("writing {}", out.display()))?;
            write_sidecar(out, "report", json!({ "in": a.inputs, "format": format!("{:?}", a.format).to_lowercase(), "out": out }))?;
        }
        None => print!("{doc}"),
    }
    Ok(())
}
