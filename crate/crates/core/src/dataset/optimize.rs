use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::circuit::{Circuit, GateKind};
use crate::qsim::{ghz_fidelity, ClassifierTask, StateVector};

/// What [`optimize_params`] maximizes.
#[derive(Clone, Debug)]
pub enum Objective {
    Ghz,
    Ml(ClassifierTask),
}

const SWEEPS: usize = 2;
const GRID: usize = 32;

/// Caches per-sample encoded states for the classifier objective.
pub(crate) struct Scorer<'a> {
    objective: &'a Objective,
    states: Vec<StateVector>,
}

impl<'a> Scorer<'a> {
    pub(crate) fn new(objective: &'a Objective, num_qubits: usize) -> Self {
        let states = match objective {
            Objective::Ghz => Vec::new(),
            Objective::Ml(task) => task.encoded_states(num_qubits.max(1)),
        };
        Scorer { objective, states }
    }

    pub(crate) fn score(&self, circuit: &Circuit) -> f64 {
        match self.objective {
            Objective::Ghz => ghz_fidelity(circuit),
            Objective::Ml(task) => task.accuracy_from_states(&self.states, circuit),
        }
    }
}

/// Closed-form maximizer of `f(θ) = c + A cos θ + B sin θ` from three evaluations.
///
/// The arctangent step lands on the minimizer; the maximizer sits half a turn away, and both are
/// evaluated so the higher one wins.
pub fn rotosolve_angle(f: impl Fn(f64) -> f64, theta: f64) -> f64 {
    let (f0, fp, fm) = (f(theta), f(theta + FRAC_PI_2), f(theta - FRAC_PI_2));
    let lo = theta - FRAC_PI_2 - (2.0 * f0 - fp - fm).atan2(fp - fm);
    let hi = lo + PI;
    if f(hi) >= f(lo) {
        hi
    } else {
        lo
    }
}

/// Grid scan followed by one parabolic refinement around the best grid point.
fn scan_angle(f: impl Fn(f64) -> f64) -> f64 {
    let step = TAU / GRID as f64;
    let values: Vec<f64> = (0..GRID).map(|j| f(j as f64 * step)).collect();
    let best = (0..GRID).fold(0, |b, j| if values[j] > values[b] { j } else { b });
    let (fm, f0, fp) = (
        values[(best + GRID - 1) % GRID],
        values[best],
        values[(best + 1) % GRID],
    );
    let theta = best as f64 * step;
    let curvature = fm - 2.0 * f0 + fp;
    if curvature < 0.0 {
        let refined = theta + 0.5 * step * (fm - fp) / curvature;
        if f(refined) > f0 {
            return refined;
        }
    }
    theta
}

fn is_sinusoidal(kind: GateKind) -> bool {
    matches!(kind, GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Rzz)
}

/// Coordinate-wise parameter sweep, two passes in time order. Never lowers the objective.
pub fn optimize_params(circuit: &Circuit, objective: &Objective) -> Circuit {
    let kinds: Vec<GateKind> = circuit
        .placements()
        .filter(|p| p.param.is_some())
        .map(|p| p.kind)
        .collect();
    if kinds.is_empty() {
        return circuit.clone();
    }
    let scorer = Scorer::new(objective, circuit.num_qubits());
    let mut params = circuit.params();
    let mut current = scorer.score(circuit);
    for _ in 0..SWEEPS {
        for (k, &kind) in kinds.iter().enumerate() {
            let f = |theta: f64| {
                let mut trial = params.clone();
                trial[k] = theta;
                scorer.score(&circuit.with_params(&trial))
            };
            let proposal = match objective {
                Objective::Ghz if is_sinusoidal(kind) => rotosolve_angle(f, params[k]),
                _ => scan_angle(f),
            };
            let value = f(proposal);
            if value > current {
                params[k] = crate::circuit::wrap_angle(proposal);
                current = value;
            }
        }
    }
    circuit.with_params(&params)
}
