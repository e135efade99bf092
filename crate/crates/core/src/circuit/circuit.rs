use std::f64::consts::TAU;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::gates::{GateKind, GateSet};

/// Maps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// One gate applied to specific qubits within a timestep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    #[serde(rename = "gate")]
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
}

impl Placement {
    /// Builds a placement, sorting the qubits of symmetric gates and wrapping the angle.
    pub fn new(kind: GateKind, mut qubits: Vec<usize>, param: Option<f64>) -> Self {
        if kind.symmetric() {
            qubits.sort_unstable();
        }
        Placement {
            kind,
            qubits,
            param: param.map(wrap_angle),
        }
    }

    pub fn single(kind: GateKind, qubit: usize) -> Self {
        Self::new(kind, vec![qubit], None)
    }

    pub fn rotation(kind: GateKind, qubit: usize, theta: f64) -> Self {
        Self::new(kind, vec![qubit], Some(theta))
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Self::new(kind, vec![a, b], None)
    }

    fn first_qubit(&self) -> usize {
        self.qubits.iter().copied().min().unwrap_or(usize::MAX)
    }

    fn write_structure(&self, out: &mut String) {
        out.push_str(self.kind.name());
        for (i, q) in self.qubits.iter().enumerate() {
            out.push(if i == 0 { ':' } else { '-' });
            let _ = write!(out, "{q}");
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawCircuit {
    num_qubits: usize,
    slots: Vec<Vec<Placement>>,
}

/// A circuit over `num_qubits` qubits as an ordered list of timesteps.
///
/// Placements inside a slot are kept in canonical order (by lowest qubit), so two circuits that
/// describe the same slots compare equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawCircuit", into = "RawCircuit")]
pub struct Circuit {
    num_qubits: usize,
    slots: Vec<Vec<Placement>>,
}

impl From<RawCircuit> for Circuit {
    fn from(raw: RawCircuit) -> Self {
        Circuit::from_slots(raw.num_qubits, raw.slots)
    }
}

impl From<Circuit> for RawCircuit {
    fn from(c: Circuit) -> Self {
        RawCircuit {
            num_qubits: c.num_qubits,
            slots: c.slots,
        }
    }
}

impl Circuit {
    pub fn empty(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            slots: Vec::new(),
        }
    }

    pub fn from_slots(num_qubits: usize, slots: Vec<Vec<Placement>>) -> Self {
        let slots = slots
            .into_iter()
            .map(|slot| {
                let mut slot: Vec<Placement> = slot
                    .into_iter()
                    .map(|p| Placement::new(p.kind, p.qubits, p.param))
                    .collect();
                slot.sort_by_key(Placement::first_qubit);
                slot
            })
            .collect();
        Circuit { num_qubits, slots }
    }

    /// Packs a gate list as-soon-as-possible: each gate goes into the slot right after the last
    /// slot touching any of its qubits.
    pub fn pack(num_qubits: usize, gates: Vec<Placement>) -> Self {
        let mut frontier = vec![0usize; num_qubits];
        let mut slots: Vec<Vec<Placement>> = Vec::new();
        for gate in gates {
            let at = gate
                .qubits
                .iter()
                .map(|&q| frontier[q])
                .max()
                .unwrap_or(0);
            for &q in &gate.qubits {
                frontier[q] = at + 1;
            }
            if slots.len() <= at {
                slots.resize_with(at + 1, Vec::new);
            }
            slots[at].push(gate);
        }
        Circuit::from_slots(num_qubits, slots)
    }

    /// The canonical 3-qubit style GHZ preparation: `h` on qubit 0 followed by a `cx` chain.
    pub fn ghz_canonical(num_qubits: usize) -> Self {
        let mut gates = vec![Placement::single(GateKind::H, 0)];
        gates.extend((1..num_qubits).map(|q| Placement::two(GateKind::Cx, q - 1, q)));
        Circuit::pack(num_qubits, gates)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn slots(&self) -> &[Vec<Placement>] {
        &self.slots
    }

    pub fn depth(&self) -> usize {
        self.slots.len()
    }

    pub fn gate_count(&self) -> usize {
        self.slots.iter().map(Vec::len).sum()
    }

    pub fn placements(&self) -> impl Iterator<Item = &Placement> {
        self.slots.iter().flatten()
    }

    /// Angles of the parameterized gates in time order.
    pub fn params(&self) -> Vec<f64> {
        self.placements().filter_map(|p| p.param).collect()
    }

    /// Returns a copy with the parameterized gates' angles replaced, in time order.
    pub fn with_params(&self, params: &[f64]) -> Self {
        let mut it = params.iter();
        let slots = self
            .slots
            .iter()
            .map(|slot| {
                slot.iter()
                    .map(|p| {
                        let mut p = p.clone();
                        if p.param.is_some() {
                            p.param = Some(wrap_angle(*it.next().expect("too few parameters")));
                        }
                        p
                    })
                    .collect()
            })
            .collect();
        Circuit {
            num_qubits: self.num_qubits,
            slots,
        }
    }

    /// Same structure, and every angle within `tol` of its counterpart.
    pub fn approx_eq(&self, other: &Circuit, tol: f64) -> bool {
        self.structural_key() == other.structural_key()
            && self
                .params()
                .iter()
                .zip(other.params())
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Appends one slot holding the given placements.
    pub fn push_slot(&mut self, slot: Vec<Placement>) {
        let mut slot: Vec<Placement> = slot
            .into_iter()
            .map(|p| Placement::new(p.kind, p.qubits, p.param))
            .collect();
        slot.sort_by_key(Placement::first_qubit);
        self.slots.push(slot);
    }

    pub fn validate(&self, gateset: &GateSet) -> ValidationResult {
        let mut violations = Vec::new();
        if self.num_qubits == 0 {
            violations.push(Violation {
                slot: 0,
                qubits: vec![],
                kind: ViolationKind::NoQubits,
            });
        }
        for (s, slot) in self.slots.iter().enumerate() {
            let mut used = vec![false; self.num_qubits];
            for p in slot {
                let mut push = |kind| {
                    violations.push(Violation {
                        slot: s,
                        qubits: p.qubits.clone(),
                        kind,
                    })
                };
                if !gateset.contains(p.kind) {
                    push(ViolationKind::KindNotInGateSet(p.kind));
                }
                if p.qubits.len() != p.kind.arity() {
                    push(ViolationKind::WrongArity(p.kind));
                }
                if p.param.is_some() != p.kind.is_parameterized() {
                    push(ViolationKind::ParamMismatch(p.kind));
                }
                if let Some(theta) = p.param {
                    if !(0.0..TAU).contains(&theta) {
                        push(ViolationKind::AngleOutOfRange);
                    }
                }
                for (i, &q) in p.qubits.iter().enumerate() {
                    if p.qubits[..i].contains(&q) {
                        push(ViolationKind::DuplicateQubit);
                    } else if q >= self.num_qubits {
                        push(ViolationKind::QubitOutOfRange);
                    } else if used[q] {
                        push(ViolationKind::QubitCollision);
                    } else {
                        used[q] = true;
                    }
                }
            }
        }
        ValidationResult { violations }
    }

    /// Architecture key: qubit count and per-slot placements, angles omitted.
    pub fn structural_key(&self) -> String {
        self.key(false)
    }

    /// [`structural_key`](Self::structural_key) plus every angle rounded to 4 decimals.
    pub fn param_key(&self) -> String {
        self.key(true)
    }

    fn key(&self, with_params: bool) -> String {
        let mut out = format!("{}|", self.num_qubits);
        for (s, slot) in self.slots.iter().enumerate() {
            if s > 0 {
                out.push(';');
            }
            for (i, p) in slot.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                p.write_structure(&mut out);
                if with_params {
                    if let Some(theta) = p.param {
                        let _ = write!(out, "@{theta:.4}");
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    NoQubits,
    KindNotInGateSet(GateKind),
    WrongArity(GateKind),
    ParamMismatch(GateKind),
    AngleOutOfRange,
    DuplicateQubit,
    QubitOutOfRange,
    QubitCollision,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::NoQubits => f.write_str("circuit has no qubits"),
            ViolationKind::KindNotInGateSet(k) => write!(f, "kind not in gateset ({k})"),
            ViolationKind::WrongArity(k) => write!(f, "wrong qubit count for {k}"),
            ViolationKind::ParamMismatch(k) => write!(f, "parameter mismatch for {k}"),
            ViolationKind::AngleOutOfRange => f.write_str("angle outside [0, 2pi)"),
            ViolationKind::DuplicateQubit => f.write_str("duplicate qubit in placement"),
            ViolationKind::QubitOutOfRange => f.write_str("qubit out of range"),
            ViolationKind::QubitCollision => f.write_str("qubit collision"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub slot: usize,
    pub qubits: Vec<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "slot {} qubits {:?}: {}", self.slot, self.qubits, self.kind)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}
