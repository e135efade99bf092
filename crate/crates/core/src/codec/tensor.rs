use std::fmt;

use serde::{Deserialize, Serialize};

use super::table::EmbeddingTable;
use super::{denormalize_angle, normalize_angle};
use crate::circuit::{Circuit, GateSet, Placement, Role, Token};
use crate::error::{Error, Result};

/// Real tensor of shape `channels × num_qubits × slots`, stored channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitTensor {
    pub channels: usize,
    pub num_qubits: usize,
    pub slots: usize,
    pub data: Vec<f64>,
}

impl CircuitTensor {
    pub fn zeros(channels: usize, num_qubits: usize, slots: usize) -> Self {
        CircuitTensor {
            channels,
            num_qubits,
            slots,
            data: vec![0.0; channels * num_qubits * slots],
        }
    }

    pub fn from_data(channels: usize, num_qubits: usize, slots: usize, data: Vec<f64>) -> Result<Self> {
        let want = channels * num_qubits * slots;
        if data.len() != want {
            return Err(Error::Shape {
                expected: format!("{want} values ({channels}x{num_qubits}x{slots})"),
                actual: format!("{} values", data.len()),
            });
        }
        Ok(CircuitTensor {
            channels,
            num_qubits,
            slots,
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.channels, self.num_qubits, self.slots]
    }

    #[inline]
    pub fn index(&self, channel: usize, qubit: usize, slot: usize) -> usize {
        (channel * self.num_qubits + qubit) * self.slots + slot
    }

    pub fn get(&self, channel: usize, qubit: usize, slot: usize) -> f64 {
        self.data[self.index(channel, qubit, slot)]
    }

    pub fn set(&mut self, channel: usize, qubit: usize, slot: usize, value: f64) {
        let i = self.index(channel, qubit, slot);
        self.data[i] = value;
    }

    /// The channel vector at one (qubit, slot) position.
    pub fn column(&self, qubit: usize, slot: usize) -> Vec<f64> {
        (0..self.channels).map(|c| self.get(c, qubit, slot)).collect()
    }
}

pub fn encode(circuit: &Circuit, table: &EmbeddingTable, slots: usize) -> Result<CircuitTensor> {
    if circuit.depth() > slots {
        return Err(Error::Shape {
            expected: format!("at most {slots} slots"),
            actual: format!("{} slots", circuit.depth()),
        });
    }
    let gateset = GateSet::new(table.gateset);
    let d = table.dim;
    let n = circuit.num_qubits();
    let mut tensor = CircuitTensor::zeros(d + 1, n, slots);
    let write_token = |tensor: &mut CircuitTensor, token: Token, q: usize, s: usize| -> Result<()> {
        let idx = gateset
            .token_index(token)
            .ok_or_else(|| Error::InvalidCircuit(format!("token {token} not in {}", gateset.id())))?;
        for (c, &v) in table.vectors[idx].iter().enumerate() {
            tensor.set(c, q, s, v);
        }
        Ok(())
    };
    for q in 0..n {
        for s in 0..slots {
            write_token(&mut tensor, Token::NoOp, q, s)?;
        }
    }
    for (s, slot) in circuit.slots().iter().enumerate() {
        for p in slot {
            if p.qubits.len() != p.kind.arity() || p.qubits.iter().any(|&q| q >= n) {
                return Err(Error::InvalidCircuit(format!("malformed {} placement in slot {s}", p.kind)));
            }
            for (&q, &role) in p.qubits.iter().zip(p.kind.roles().iter().cycle()) {
                write_token(&mut tensor, Token::Gate(p.kind, role), q, s)?;
            }
            if let Some(theta) = p.param {
                let value = normalize_angle(theta);
                match p.kind.roles() {
                    [Role::Control, Role::Target] => tensor.set(d, p.qubits[1], s, value),
                    _ => p.qubits.iter().for_each(|&q| tensor.set(d, q, s, value)),
                }
            }
        }
    }
    Ok(tensor)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeErrorKind {
    /// Role tokens of a gate kind that cannot be matched into complete placements.
    UnpairedRole,
    /// Several complete control/target pairs of one kind in a slot with no way to match them.
    AmbiguousPairing,
}

impl fmt::Display for DecodeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecodeErrorKind::UnpairedRole => "unpaired-role",
            DecodeErrorKind::AmbiguousPairing => "ambiguous-pairing",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeError {
    pub kind: DecodeErrorKind,
    pub slot: usize,
    pub qubits: Vec<usize>,
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in slot {} on qubits {:?}", self.kind, self.slot, self.qubits)
    }
}

pub type DecodeOutcome = std::result::Result<Circuit, DecodeError>;

/// Nearest-token decoding with role pairing.
///
/// Slots left entirely idle are dropped, so the decoded circuit has no empty slots.
pub fn decode(tensor: &CircuitTensor, table: &EmbeddingTable, gateset: &GateSet) -> DecodeOutcome {
    let d = table.dim;
    let n = tensor.num_qubits;
    assert_eq!(tensor.channels, d + 1, "tensor channels must be d_c + 1");
    let vocab = gateset.vocabulary();
    let mut slots = Vec::new();
    let mut column = vec![0.0; d];
    for s in 0..tensor.slots {
        let mut tokens = Vec::with_capacity(n);
        for q in 0..n {
            for (c, v) in column.iter_mut().enumerate() {
                *v = tensor.get(c, q, s);
            }
            tokens.push(vocab[table.nearest(&column)]);
        }
        let param = |q: usize| tensor.get(d, q, s);
        let slot = assemble_slot(&tokens, param, gateset, s)?;
        if !slot.is_empty() {
            slots.push(slot);
        }
    }
    Ok(Circuit::from_slots(n, slots))
}

fn assemble_slot(
    tokens: &[Token],
    param: impl Fn(usize) -> f64,
    gateset: &GateSet,
    slot: usize,
) -> std::result::Result<Vec<Placement>, DecodeError> {
    let mut out = Vec::new();
    let qubits_with = |t: Token| -> Vec<usize> {
        tokens.iter().enumerate().filter(|(_, &x)| x == t).map(|(q, _)| q).collect()
    };
    for &kind in gateset.kinds() {
        let angle = |qs: &[usize]| -> Option<f64> {
            kind.is_parameterized().then(|| {
                let mean = qs.iter().map(|&q| param(q)).sum::<f64>() / qs.len() as f64;
                denormalize_angle(mean)
            })
        };
        match kind.roles() {
            [Role::Single] => {
                for q in qubits_with(Token::Gate(kind, Role::Single)) {
                    out.push(Placement::new(kind, vec![q], angle(&[q])));
                }
            }
            [Role::Shared] => {
                let qs = qubits_with(Token::Gate(kind, Role::Shared));
                if qs.len() % 2 == 1 {
                    return Err(DecodeError {
                        kind: DecodeErrorKind::UnpairedRole,
                        slot,
                        qubits: qs,
                    });
                }
                for pair in qs.chunks(2) {
                    out.push(Placement::new(kind, pair.to_vec(), angle(pair)));
                }
            }
            _ => {
                let controls = qubits_with(Token::Gate(kind, Role::Control));
                let targets = qubits_with(Token::Gate(kind, Role::Target));
                match (controls.len(), targets.len()) {
                    (0, 0) => {}
                    (1, 1) => out.push(Placement::new(
                        kind,
                        vec![controls[0], targets[0]],
                        angle(&targets),
                    )),
                    (c, t) => {
                        let kind = if c == t {
                            DecodeErrorKind::AmbiguousPairing
                        } else {
                            DecodeErrorKind::UnpairedRole
                        };
                        let mut qubits = [controls, targets].concat();
                        qubits.sort_unstable();
                        return Err(DecodeError { kind, slot, qubits });
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind::*;
    use crate::codec::build_table;
    use std::f64::consts::PI;

    fn gs1_table() -> EmbeddingTable {
        build_table(&GateSet::gs1(), 16, 1).unwrap()
    }

    #[test]
    fn parameter_channel_values() {
        let t = gs1_table();
        let c = Circuit::from_slots(1, vec![vec![Placement::rotation(Rx, 0, PI)]]);
        let x = encode(&c, &t, 2).unwrap();
        assert_eq!(x.get(16, 0, 0), 0.0);
        for ch in 0..16 {
            assert_eq!(x.get(ch, 0, 0), t.vectors[4][ch]);
            assert_eq!(x.get(ch, 0, 1), t.vectors[0][ch]);
        }
        assert_eq!(x.get(16, 0, 1), 0.0);
        let c0 = Circuit::from_slots(1, vec![vec![Placement::rotation(Rx, 0, 0.0)]]);
        assert_eq!(encode(&c0, &t, 1).unwrap().get(16, 0, 0), -1.0);
    }

    #[test]
    fn cx_roles() {
        let t = gs1_table();
        let c = Circuit::from_slots(2, vec![vec![Placement::two(Cx, 0, 1)]]);
        let x = encode(&c, &t, 1).unwrap();
        assert_eq!(x.column(0, 0)[..16], t.vectors[1][..]);
        assert_eq!(x.column(1, 0)[..16], t.vectors[2][..]);
        assert_eq!(x.get(16, 0, 0), 0.0);
        assert_eq!(x.get(16, 1, 0), 0.0);
    }

    #[test]
    fn rejects_too_deep() {
        let t = gs1_table();
        assert!(encode(&Circuit::ghz_canonical(3), &t, 2).is_err());
    }

    #[test]
    fn roundtrip_ml_and_gs2() {
        let ml = GateSet::ml();
        let t = build_table(&ml, 16, 4).unwrap();
        let c = Circuit::from_slots(
            3,
            vec![
                vec![Placement::new(Crx, vec![2, 0], Some(1.25)), Placement::rotation(Ry, 1, 5.0)],
                vec![Placement::two(Swap, 1, 2), Placement::single(H, 0)],
                vec![Placement::new(Cry, vec![0, 1], Some(0.5))],
            ],
        );
        let x = encode(&c, &t, 5).unwrap();
        assert_eq!(x.get(16, 2, 0), 0.0);
        assert!(decode(&x, &t, &ml).unwrap().approx_eq(&c, 1e-9));

        let gs2 = GateSet::gs2();
        let t2 = build_table(&gs2, 16, 4).unwrap();
        let c2 = Circuit::from_slots(
            3,
            vec![vec![Placement::new(Rzz, vec![2, 0], Some(2.0)), Placement::single(Sx, 1)]],
        );
        let x2 = encode(&c2, &t2, 1).unwrap();
        assert_eq!(x2.get(16, 0, 0), x2.get(16, 2, 0));
        let back = decode(&x2, &t2, &gs2).unwrap();
        assert_eq!(back.structural_key(), c2.structural_key());
        assert!((back.params()[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn lone_control_is_unpaired() {
        let t = gs1_table();
        let mut x = encode(&Circuit::empty(3), &t, 2).unwrap();
        for ch in 0..16 {
            x.set(ch, 1, 0, t.vectors[1][ch]);
        }
        let e = decode(&x, &t, &GateSet::gs1()).unwrap_err();
        assert_eq!(e, DecodeError { kind: DecodeErrorKind::UnpairedRole, slot: 0, qubits: vec![1] });
    }

    #[test]
    fn two_cx_pairs_are_ambiguous() {
        let t = gs1_table();
        let mut x = encode(&Circuit::empty(4), &t, 1).unwrap();
        for (q, tok) in [(0, 1), (1, 2), (2, 1), (3, 2)] {
            for ch in 0..16 {
                x.set(ch, q, 0, t.vectors[tok][ch]);
            }
        }
        let e = decode(&x, &t, &GateSet::gs1()).unwrap_err();
        assert_eq!(e.kind, DecodeErrorKind::AmbiguousPairing);
    }

    #[test]
    fn symmetric_pairs_by_ascending_qubit() {
        let gs2 = GateSet::gs2();
        let t = build_table(&gs2, 16, 2).unwrap();
        let mut x = encode(&Circuit::empty(4), &t, 1).unwrap();
        for q in 0..4 {
            for ch in 0..16 {
                x.set(ch, q, 0, t.vectors[1][ch]);
            }
        }
        let c = decode(&x, &t, &gs2).unwrap();
        assert_eq!(c.structural_key(), "4|cz:0-1,cz:2-3");
        for ch in 0..16 {
            x.set(ch, 3, 0, t.vectors[0][ch]);
        }
        assert_eq!(decode(&x, &t, &gs2).unwrap_err().kind, DecodeErrorKind::UnpairedRole);
    }

    #[test]
    fn noisy_parameters_are_clamped() {
        let t = gs1_table();
        let c = Circuit::from_slots(1, vec![vec![Placement::rotation(Rz, 0, 1.0)]]);
        let mut x = encode(&c, &t, 1).unwrap();
        x.set(16, 0, 0, 7.5);
        assert_eq!(decode(&x, &t, &GateSet::gs1()).unwrap().params(), vec![0.0]);
        x.set(16, 0, 0, -3.0);
        assert_eq!(decode(&x, &t, &GateSet::gs1()).unwrap().params(), vec![0.0]);
        x.set(16, 0, 0, f64::NAN);
        assert!(decode(&x, &t, &GateSet::gs1()).is_ok());
    }
}
