use std::f64::consts::{FRAC_PI_2, TAU};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::circuit::{Circuit, GateKind, GateSet, GateSetId, Placement};

/// One random placement: uniform kind, uniform distinct qubits, uniform angle.
pub(crate) fn random_placement<R: Rng + ?Sized>(kinds: &[GateKind], num_qubits: usize, rng: &mut R) -> Placement {
    let kind = *kinds.choose(rng).expect("gate set has a kind that fits the register");
    let a = rng.gen_range(0..num_qubits);
    let mut qubits = vec![a];
    if kind.arity() == 2 {
        let mut b = rng.gen_range(0..num_qubits - 1);
        if b >= a {
            b += 1;
        }
        qubits.push(b);
    }
    let param = kind.is_parameterized().then(|| rng.gen_range(0.0..TAU));
    Placement::new(kind, qubits, param)
}

pub(crate) fn usable_kinds(gateset: &GateSet, num_qubits: usize) -> Vec<GateKind> {
    gateset
        .kinds()
        .iter()
        .copied()
        .filter(|k| k.arity() <= num_qubits)
        .collect()
}

/// A random valid circuit with exactly `gate_count` gates, packed as-soon-as-possible.
pub fn sample_structure<R: Rng + ?Sized>(
    gateset: &GateSet,
    num_qubits: usize,
    gate_count: usize,
    rng: &mut R,
) -> Circuit {
    let kinds = usable_kinds(gateset, num_qubits);
    let gates = (0..gate_count)
        .map(|_| random_placement(&kinds, num_qubits, rng))
        .collect();
    Circuit::pack(num_qubits, gates)
}

/// Gate list preparing the GHZ state with kinds from the given set, in time order.
///
/// `gs1` and `ml` use `h` plus a `cx` chain. `gs2` builds each Hadamard from `rz(π/2)·sx·rz(π/2)`
/// and each CNOT as `H·cz·H` on the target.
pub fn ghz_skeleton(gateset: GateSetId, num_qubits: usize) -> Vec<Placement> {
    use GateKind::*;
    match gateset {
        GateSetId::Gs1 | GateSetId::Ml => {
            let mut g = vec![Placement::single(H, 0)];
            g.extend((1..num_qubits).map(|q| Placement::two(Cx, q - 1, q)));
            g
        }
        GateSetId::Gs2 => {
            let h = |q| {
                [
                    Placement::rotation(Rz, q, FRAC_PI_2),
                    Placement::single(Sx, q),
                    Placement::rotation(Rz, q, FRAC_PI_2),
                ]
            };
            let mut g = h(0).to_vec();
            for q in 1..num_qubits {
                g.extend(h(q));
                g.push(Placement::two(Cz, q - 1, q));
                g.extend(h(q));
            }
            g
        }
    }
}
