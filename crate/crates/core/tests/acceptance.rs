//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use rand::Rng;
use rand_distr::StandardNormal;

use pqcd_core::circuit::{Circuit, GateKind, GateSet, GateSetId, Placement};
use pqcd_core::codec::{build_table, decode, encode, DecodeError, DecodeErrorKind, EmbeddingTable};
use pqcd_core::dataset::{
    build_corpus, ghz_skeleton, rotosolve_angle, sample_structure, CorpusConfig, LabeledCircuit, TaskKind,
};
use pqcd_core::diffusion::{
    sample, train, Batch, Checkpoint, Condition, Denoiser, DenoiserConfig, SampleRequest, ScheduleConfig, TrainConfig,
    TrainData,
};
use pqcd_core::metrics::{emit_csv, evaluate, evaluate_outcomes, EvalConfig, EvalReport, Threshold};
use pqcd_core::qsim::{ghz_fidelity, simulate};
use pqcd_core::{exec, rng};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn run(id: u32, name: &str, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    println!(
        "{} [{id:>2}] {name}: {} ({:.1}s)",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail,
        start.elapsed().as_secs_f64()
    );
    v.pass
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

// 1 ------------------------------------------------------------------------------------------

fn codec_roundtrip() -> Verdict {
    let start = Instant::now();
    let mut r = rng::seeded(101);
    let (mut total, mut bad, mut worst) = (0, 0, 0.0f64);
    for id in [GateSetId::Gs1, GateSetId::Gs2, GateSetId::Ml] {
        let gs = GateSet::new(id);
        let table = build_table(&gs, 16, 1).expect("table");
        for _ in 0..10_000 {
            let c = sample_structure(&gs, 3, r.gen_range(3..=24), &mut r);
            total += 1;
            match decode(&encode(&c, &table, c.depth()).expect("fits"), &table, &gs) {
                Ok(back) if back.structural_key() == c.structural_key() => {
                    for (a, b) in back.params().iter().zip(c.params()) {
                        worst = worst.max(angle_gap(*a, b));
                    }
                }
                _ => bad += 1,
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        bad == 0 && worst <= 1e-9 && secs < 30.0,
        format!("{total} circuits, {bad} structural mismatches, max angle error {worst:.1e} (<= 1e-9), {secs:.1}s (< 30s)"),
    )
}

// 2 ------------------------------------------------------------------------------------------

/// Dense `2^n × 2^n` operators built from Kronecker products, independent of the simulator.
mod oracle {
    use super::C;

    pub type Mat = Vec<Vec<C>>;

    pub fn eye(d: usize) -> Mat {
        (0..d).map(|i| (0..d).map(|j| if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) }).collect()).collect()
    }

    pub fn mul(a: &Mat, b: &Mat) -> Mat {
        let n = a.len();
        let mut out = vec![vec![C::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for k in 0..n {
                if a[i][k] == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    pub fn add(a: &Mat, b: &Mat, wa: C, wb: C) -> Mat {
        a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| wa * x + wb * y).collect()).collect()
    }

    fn kron(a: &Mat, b: &Mat) -> Mat {
        let (na, nb) = (a.len(), b.len());
        let mut out = vec![vec![C::new(0.0, 0.0); na * nb]; na * nb];
        for i in 0..na {
            for j in 0..na {
                for k in 0..nb {
                    for l in 0..nb {
                        out[i * nb + k][j * nb + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    /// `⊗_q ops[q]` with qubit 0 as the least significant bit of the basis index.
    pub fn on_qubits(n: usize, ops: &[(usize, Mat)]) -> Mat {
        let mut m = vec![vec![C::new(1.0, 0.0)]];
        for q in (0..n).rev() {
            let op = ops.iter().find(|(k, _)| *k == q).map_or_else(|| eye(2), |(_, o)| o.clone());
            m = kron(&m, &op);
        }
        m
    }

    pub fn m2(a: [[(f64, f64); 2]; 2]) -> Mat {
        a.iter().map(|r| r.iter().map(|&(re, im)| C::new(re, im)).collect()).collect()
    }
}

fn oracle_unitary(n: usize, p: &Placement) -> oracle::Mat {
    use oracle::*;
    let one = C::new(1.0, 0.0);
    let x = m2([[(0., 0.), (1., 0.)], [(1., 0.), (0., 0.)]]);
    let y = m2([[(0., 0.), (0., -1.)], [(0., 1.), (0., 0.)]]);
    let z = m2([[(1., 0.), (0., 0.)], [(0., 0.), (-1., 0.)]]);
    let p0 = m2([[(1., 0.), (0., 0.)], [(0., 0.), (0., 0.)]]);
    let p1 = m2([[(0., 0.), (0., 0.)], [(0., 0.), (1., 0.)]]);
    let theta = p.param.unwrap_or(0.0);
    // exp(−iθP/2) = cos(θ/2)·I − i·sin(θ/2)·P
    let rot = |pauli: &Mat, t: f64| add(&eye(2), pauli, C::new((t / 2.0).cos(), 0.0), C::new(0.0, -(t / 2.0).sin()));
    let q = &p.qubits;
    let controlled = |u: Mat| {
        add(
            &on_qubits(n, &[(q[0], p0.clone())]),
            &on_qubits(n, &[(q[0], p1.clone()), (q[1], u)]),
            one,
            one,
        )
    };
    match p.kind {
        GateKind::H => on_qubits(n, &[(q[0], add(&x, &z, C::new(0.5f64.sqrt(), 0.0), C::new(0.5f64.sqrt(), 0.0)))]),
        GateKind::X => on_qubits(n, &[(q[0], x)]),
        GateKind::Id => eye(1 << n),
        GateKind::Sx => {
            let phase = C::from_polar(1.0, PI / 4.0);
            on_qubits(n, &[(q[0], add(&rot(&x, PI / 2.0), &eye(2), phase, C::new(0.0, 0.0)))])
        }
        GateKind::Rx => on_qubits(n, &[(q[0], rot(&x, theta))]),
        GateKind::Ry => on_qubits(n, &[(q[0], rot(&y, theta))]),
        GateKind::Rz => on_qubits(n, &[(q[0], rot(&z, theta))]),
        GateKind::Cx => controlled(x),
        GateKind::Cz => controlled(z),
        GateKind::Crx => controlled(rot(&x, theta)),
        GateKind::Cry => controlled(rot(&y, theta)),
        GateKind::Swap => {
            // (I + XX + YY + ZZ) / 2
            let mut m = eye(1 << n);
            for pauli in [&x, &y, &z] {
                m = add(&m, &on_qubits(n, &[(q[0], pauli.clone()), (q[1], pauli.clone())]), one, one);
            }
            add(&m, &m, C::new(0.5, 0.0), C::new(0.0, 0.0))
        }
        GateKind::Rzz => {
            let zz = on_qubits(n, &[(q[0], z.clone()), (q[1], z)]);
            add(&eye(1 << n), &zz, C::new((theta / 2.0).cos(), 0.0), C::new(0.0, -(theta / 2.0).sin()))
        }
    }
}

fn simulator_oracle() -> Verdict {
    let start = Instant::now();
    let mut r = rng::seeded(202);
    let sets = [GateSet::gs1(), GateSet::gs2(), GateSet::ml()];
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let gs = &sets[i % 3];
        let n = r.gen_range(2..=3);
        let c = sample_structure(gs, n, r.gen_range(0..=6), &mut r);
        let mut u = oracle::eye(1 << n);
        for p in c.placements() {
            u = oracle::mul(&oracle_unitary(n, p), &u);
        }
        let state = simulate(&c).expect("valid circuit");
        for (k, amp) in state.amplitudes().iter().enumerate() {
            worst = worst.max((amp - u[k][0]).norm());
        }
    }
    let ghz = ghz_fidelity(&Circuit::ghz_canonical(3));
    let ident = ghz_fidelity(&Circuit::pack(3, (0..3).map(|q| Placement::single(GateKind::Id, q)).collect()));
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-10 && (ghz - 1.0).abs() <= 1e-12 && (ident - 0.5).abs() <= 1e-12 && secs < 60.0,
        format!(
            "1000 circuits, max amplitude error {worst:.1e} (<= 1e-10); GHZ fidelity {ghz:.15}; identity fidelity {ident:.15}; {secs:.1}s (< 60s)"
        ),
    )
}

// 3 ------------------------------------------------------------------------------------------

fn schedule_identities() -> Verdict {
    let s = ScheduleConfig::default().build().expect("schedule");
    let decreasing = s.alpha_bars.windows(2).all(|w| w[1] < w[0]);
    let first = s.alpha_bars[0] == 1.0 - 1e-4;

    let gs = GateSet::gs1();
    let table = build_table(&gs, 16, 1).expect("table");
    let mut r = rng::seeded(303);
    let mut inversion = 0.0f64;
    for _ in 0..100 {
        let c = sample_structure(&gs, 3, r.gen_range(3..=10), &mut r);
        let x0 = encode(&c, &table, 8.max(c.depth())).expect("fits").data;
        let eps: Vec<f64> = x0.iter().map(|_| r.sample(StandardNormal)).collect();
        let t = r.gen_range(0..1000);
        let back = s.recover_x0(&s.forward_noise(&x0, t, &eps).expect("shape"), t, &eps);
        inversion = inversion.max(back.iter().zip(&x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }

    let model = Denoiser::new(DenoiserConfig::default(), 1).expect("model");
    let elements = 17 * 3 * 8;
    let conds = [Condition::ghz(1.0), Condition::null()];
    let mut total = 0.0;
    for b in 0..1000 {
        let x: Vec<f64> = (0..elements).map(|_| r.sample(StandardNormal)).collect();
        let eps: Vec<f64> = (0..elements).map(|_| r.sample(StandardNormal)).collect();
        let batch = Batch {
            num_qubits: 3,
            slots: 8,
            x: &x,
            t: &[r.gen_range(0..1000)],
            conds: &conds,
            cond_of: &[b % 2],
        };
        total += model.loss(&batch, &eps).expect("loss");
    }
    let mean = total / 1000.0;
    let rel = (mean / elements as f64 - 1.0).abs();
    verdict(
        decreasing && first && inversion <= 1e-9 && rel <= 0.05,
        format!(
            "alpha_bar decreasing: {decreasing}; alpha_bar_0 == 1-1e-4: {first}; inversion error {inversion:.1e} (<= 1e-9); zero-prediction loss {mean:.1} vs {elements} elements ({:.2}% off, <= 5%)",
            100.0 * rel
        ),
    )
}

// 4 ------------------------------------------------------------------------------------------

fn gradient_check() -> Verdict {
    let mut model = Denoiser::new(DenoiserConfig::default(), 404).expect("model");
    model.randomize_output(405);
    let mut r = rng::seeded(406);
    let elements = 17 * 3 * 8;
    let x: Vec<f64> = (0..elements).map(|_| r.sample(StandardNormal)).collect();
    let eps: Vec<f64> = (0..elements).map(|_| r.sample(StandardNormal)).collect();
    let conds = [Condition::ghz(0.95)];
    let batch = Batch {
        num_qubits: 3,
        slots: 8,
        x: &x,
        t: &[417],
        conds: &conds,
        cond_of: &[0],
    };
    let (_, grad) = model.loss_and_grad(&batch, &eps).expect("grad");
    let h = 1e-3;
    let (mut checked, mut skipped, mut worst) = (0, 0, 0.0f64);
    while checked < 12 {
        let i = r.gen_range(0..model.num_params());
        let orig = model.params()[i];
        model.params_mut()[i] = orig + h;
        let up = model.loss(&batch, &eps).expect("loss");
        model.params_mut()[i] = orig - h;
        let down = model.loss(&batch, &eps).expect("loss");
        model.params_mut()[i] = orig;
        let fd = (up - down) / (2.0 * h);
        if fd == 0.0 && grad[i] == 0.0 {
            // Parameter not on this sample's path (e.g. another task's embedding row).
            skipped += 1;
            continue;
        }
        worst = worst.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()));
        checked += 1;
    }
    verdict(
        worst <= 1e-4,
        format!("{checked} random coordinates (h=1e-3), max relative error {worst:.2e} (<= 1e-4); {skipped} inactive coordinates redrawn"),
    )
}

// 5 ------------------------------------------------------------------------------------------

fn dataset_balancing() -> Verdict {
    let start = Instant::now();
    let config = CorpusConfig::new(TaskKind::Ghz, GateSetId::Gs1, 3, 1000, 505);
    let corpus = match build_corpus(&config) {
        Ok(c) => c,
        Err(e) => return verdict(false, format!("construction failed: {e}")),
    };
    let gs = GateSet::gs1();
    let high = corpus.iter().filter(|r| r.value > 0.9).count();
    let low: Vec<&LabeledCircuit> = corpus.iter().filter(|r| r.value <= 0.9).collect();
    let bins = &config.balance.low_length_bins;
    let counts: Vec<usize> = bins
        .iter()
        .map(|&(lo, hi)| low.iter().filter(|r| (lo..=hi).contains(&r.gate_count)).count())
        .collect();
    let share = low.len() as f64 / bins.len() as f64;
    let even = counts.iter().all(|&c| (c as f64 - share).abs() <= 1.0);
    let relabel = corpus
        .iter()
        .map(|r| (ghz_fidelity(&r.circuit) - r.value).abs())
        .fold(0.0, f64::max);
    let valid = corpus.iter().all(|r| r.circuit.validate(&gs).is_ok() && r.gate_count == r.circuit.gate_count());
    let secs = start.elapsed().as_secs_f64();
    verdict(
        corpus.len() == 1000 && high >= 750 && even && relabel <= 1e-9 && valid && secs < 600.0,
        format!(
            "{} records, {high} with fidelity > 0.9 (>= 750); low bins {bins:?} hold {counts:?} (share {share:.2} +-1); max relabel error {relabel:.1e}; all valid: {valid}; {secs:.1}s (< 600s)",
            corpus.len()
        ),
    )
}

// 6 ------------------------------------------------------------------------------------------

fn rotosolve_correctness() -> Verdict {
    let mut r = rng::seeded(606);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let kind = [GateKind::Rx, GateKind::Ry, GateKind::Rz][i % 3];
        let mut gates = if i % 2 == 0 { ghz_skeleton(GateSetId::Gs1, 3) } else { Vec::new() };
        for _ in 0..r.gen_range(0..=3) {
            let g = if r.gen_bool(0.5) {
                Placement::single(GateKind::H, r.gen_range(0..3))
            } else {
                let a = r.gen_range(0..3);
                Placement::two(GateKind::Cx, a, (a + r.gen_range(1..3)) % 3)
            };
            let at = r.gen_range(0..=gates.len());
            gates.insert(at, g);
        }
        let at = r.gen_range(0..=gates.len());
        gates.insert(at, Placement::rotation(kind, r.gen_range(0..3), r.gen_range(0.0..TAU)));
        let c = Circuit::pack(3, gates);
        let f = |theta: f64| ghz_fidelity(&c.with_params(&[theta]));
        let best = f(rotosolve_angle(f, c.params()[0]));
        let grid = (0..10_000).map(|k| f(TAU * k as f64 / 10_000.0)).fold(f64::MIN, f64::max);
        worst = worst.max((best - grid).abs());
    }
    verdict(
        worst <= 1e-6,
        format!("100 single-rotation circuits, max |f(rotosolve) - grid max| {worst:.1e} (<= 1e-6)"),
    )
}

// 7 ------------------------------------------------------------------------------------------

struct Trained {
    corpus: Vec<LabeledCircuit>,
    table: EmbeddingTable,
    model: Denoiser,
    w75: EvalReport,
    hyper: TrainConfig,
}

const GUIDANCE_SEED: u64 = 11;

fn guidance_corpus() -> pqcd_core::Result<Vec<LabeledCircuit>> {
    let mut config = CorpusConfig::new(TaskKind::Ghz, GateSetId::Gs1, 3, 2000, 7);
    config.max_depth = Some(8);
    build_corpus(&config)
}

fn sample_report(model: &Denoiser, table: &EmbeddingTable, w: f64, n: usize, count: usize) -> pqcd_core::Result<EvalReport> {
    let schedule = ScheduleConfig::default().build()?;
    let req = SampleRequest {
        condition: Condition::ghz(1.0),
        guidance: w,
        count,
        num_qubits: n,
        slots: 8,
        seed: GUIDANCE_SEED,
    };
    let start = Instant::now();
    let tensors = sample(model, &schedule, &req)?;
    let config = EvalConfig::new(TaskKind::Ghz, Threshold::default_for(TaskKind::Ghz, 1.0), n, 8);
    Ok(evaluate(&tensors, table, &GateSet::gs1(), &config, start.elapsed().as_secs_f64()))
}

fn training_and_guidance(slot: &mut Option<Trained>) -> Verdict {
    let start = Instant::now();
    let result = (|| -> pqcd_core::Result<(Verdict, Trained)> {
        let corpus = guidance_corpus()?;
        let gs = GateSet::gs1();
        let table = build_table(&gs, 16, 1)?;
        let schedule = ScheduleConfig::default().build()?;
        let hyper = TrainConfig {
            seed: 3,
            ..TrainConfig::default()
        };
        let data = TrainData {
            corpus: &corpus,
            table: &table,
            schedule: &schedule,
            num_qubits: 3,
            slots: 8,
        };
        let out = train(data, DenoiserConfig::default(), &hyper, |_| {})?;
        let ratio = out.final_smoothed / out.initial_smoothed;
        let w0 = sample_report(&out.denoiser, &table, 0.0, 3, 200)?;
        let w75 = sample_report(&out.denoiser, &table, 7.5, 3, 200)?;
        let (m0, m75) = (w0.aggregates.mean_value.unwrap_or(0.0), w75.aggregates.mean_value.unwrap_or(0.0));
        let (f0, f75) = (w0.fraction_at_least(0.9), w75.fraction_at_least(0.9));
        let secs = start.elapsed().as_secs_f64();
        let pass = ratio <= 0.5 && m75 - m0 >= 0.05 && f75 >= 2.0 * f0 && f75 > 0.0 && secs < 1800.0;
        let detail = format!(
            "smoothed loss {:.2} -> {:.2} (ratio {ratio:.3} <= 0.5); mean decoded fidelity w=0 {m0:.3}, w=7.5 {m75:.3} (gain {:.3} >= 0.05); fraction >= 0.9: w=0 {f0:.3}, w=7.5 {f75:.3} (>= 2x); decode errors {} / {}; {secs:.0}s (< 1800s)",
            out.initial_smoothed,
            out.final_smoothed,
            m75 - m0,
            w0.aggregates.error_count,
            w75.aggregates.error_count,
        );
        Ok((
            verdict(pass, detail),
            Trained {
                corpus,
                table,
                model: out.denoiser,
                w75,
                hyper,
            },
        ))
    })();
    match result {
        Ok((v, t)) => {
            *slot = Some(t);
            v
        }
        Err(e) => verdict(false, format!("pipeline failed: {e}")),
    }
}

// 8 ------------------------------------------------------------------------------------------

fn zero_shot(trained: Option<&Trained>) -> Verdict {
    let Some(t) = trained else {
        return verdict(false, "needs the trained 3-qubit checkpoint, which was not produced".into());
    };
    let mut errors = vec![format!("N=3: {}/200", t.w75.aggregates.error_count)];
    let mut ok = true;
    for n in [4, 5] {
        match sample_report(&t.model, &t.table, 7.5, n, 32) {
            Ok(report) => {
                let complete = report.records.len() == 32
                    && report.records.iter().all(|r| r.is_decoded() == r.value.is_some());
                ok &= complete;
                errors.push(format!("N={n}: {}/32", report.aggregates.error_count));
            }
            Err(e) => {
                ok = false;
                errors.push(format!("N={n}: sampling failed: {e}"));
            }
        }
    }
    verdict(ok, format!("every sample decoded or flagged; decode errors {}", errors.join(", ")))
}

// 9 ------------------------------------------------------------------------------------------

fn metrics_definitions() -> Verdict {
    let rz_tail = |theta: f64| {
        let mut g = ghz_skeleton(GateSetId::Gs1, 3);
        g.push(Placement::rotation(GateKind::Rz, 0, theta));
        Circuit::pack(3, g)
    };
    let outcomes = vec![
        (Ok(rz_tail(0.0)), 0.0),
        (Ok(rz_tail(TAU - 1e-9)), 0.0),
        (Ok(Circuit::ghz_canonical(3)), 0.0),
        (
            Err(DecodeError {
                kind: DecodeErrorKind::UnpairedRole,
                slot: 1,
                qubits: vec![0],
            }),
            0.0,
        ),
    ];
    let config = EvalConfig::new(TaskKind::Ghz, Threshold::default_for(TaskKind::Ghz, 1.0), 3, 16);
    let report = evaluate_outcomes(&outcomes, &config, 0.0);
    let a = &report.aggregates;
    let csv = emit_csv(std::slice::from_ref(&report));
    let header = csv.lines().next().unwrap_or("");
    let expected = "qubits,max_gates,gen_time_s,conv_time_s,high_count,uniq_struct,uniq_hash,error_count";
    let row_ok = csv.lines().nth(1) == Some("3,16,0.000000,0.000000,3,2,3,1");
    verdict(
        (a.unique_structures, a.unique_hashes, a.error_count) == (2, 3, 1) && header == expected && row_ok,
        format!(
            "fixture gives unique_structures={} unique_hashes={} error_count={} (expected 2/3/1); CSV header matches: {}; row matches: {row_ok}",
            a.unique_structures,
            a.unique_hashes,
            a.error_count,
            header == expected
        ),
    )
}

// 10 -----------------------------------------------------------------------------------------

fn determinism(trained: Option<&Trained>) -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;

    let small = || {
        let mut c = CorpusConfig::new(TaskKind::Ghz, GateSetId::Gs1, 3, 300, 1010);
        c.max_depth = Some(8);
        build_corpus(&c).map(|v| serde_json::to_string(&v).expect("serializes"))
    };
    match (small(), small()) {
        (Ok(a), Ok(b)) => {
            ok &= a == b;
            notes.push(format!("dataset identical: {}", a == b));
        }
        _ => {
            ok = false;
            notes.push("dataset construction failed".into());
        }
    }

    let Some(t) = trained else {
        notes.push("training/sampling need the criterion-7 corpus, which was not produced".into());
        return verdict(false, notes.join("; "));
    };
    let schedule = ScheduleConfig::default().build().expect("schedule");
    let hyper = TrainConfig {
        steps: 40,
        ..t.hyper.clone()
    };
    let data = TrainData {
        corpus: &t.corpus,
        table: &t.table,
        schedule: &schedule,
        num_qubits: 3,
        slots: 8,
    };
    let bytes = || -> pqcd_core::Result<Vec<u8>> {
        let out = train(data, DenoiserConfig::default(), &hyper, |_| {})?;
        let mut buf = Vec::new();
        Checkpoint::from_training(&out, &t.table, &schedule, &hyper, 3, 8).to_writer(&mut buf)?;
        Ok(buf)
    };
    match (bytes(), bytes()) {
        (Ok(a), Ok(b)) => {
            ok &= a == b;
            notes.push(format!("training checkpoints identical: {}", a == b));
        }
        _ => {
            ok = false;
            notes.push("training failed".into());
        }
    }

    let req = SampleRequest {
        condition: Condition::ghz(1.0),
        guidance: 7.5,
        count: 24,
        num_qubits: 3,
        slots: 8,
        seed: 99,
    };
    let a = sample(&t.model, &schedule, &req).expect("sample");
    let b = sample(&t.model, &schedule, &req).expect("sample");
    exec::set_mode(exec::Mode::Sequential);
    let c = sample(&t.model, &schedule, &req).expect("sample");
    exec::set_mode(exec::Mode::Parallel);
    ok &= a == b && a == c;
    notes.push(format!("sampling identical: {} (sequential mode too: {})", a == b, a == c));
    verdict(ok, notes.join("; "))
}

fn main() {
    let start = Instant::now();
    let mut passed = vec![
        run(1, "codec roundtrip", codec_roundtrip),
        run(2, "simulator oracle equivalence", simulator_oracle),
        run(3, "schedule and forward-process identities", schedule_identities),
        run(4, "denoiser gradient check", gradient_check),
        run(5, "dataset balancing", dataset_balancing),
        run(6, "rotosolve correctness", rotosolve_correctness),
    ];
    let mut trained = None;
    passed.push(run(7, "training smoke and guidance efficacy", || training_and_guidance(&mut trained)));
    passed.push(run(8, "zero-shot shape generalization", || zero_shot(trained.as_ref())));
    passed.push(run(9, "metrics definitions", metrics_definitions));
    passed.push(run(10, "determinism", || determinism(trained.as_ref())));
    let ok = passed.iter().filter(|&&p| p).count();
    println!(
        "acceptance: {ok}/{} criteria passed in {:.0?}",
        passed.len(),
        Duration::from_secs(start.elapsed().as_secs())
    );
    if ok != passed.len() {
        std::process::exit(1);
    }
}
