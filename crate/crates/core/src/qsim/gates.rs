use num_complex::Complex64 as C;

use crate::circuit::{GateKind, Placement};

/// Unitary of a placement. Two-qubit matrices index the basis as `2·bit(qubits[0]) + bit(qubits[1])`.
#[derive(Clone, Debug, PartialEq)]
pub enum GateMatrix {
    One([[C; 2]; 2]),
    Two([[C; 4]; 4]),
}

const O: C = C::new(0.0, 0.0);
const I1: C = C::new(1.0, 0.0);

fn rx(theta: f64) -> [[C; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C::new(c, 0.0), C::new(0.0, -s)], [C::new(0.0, -s), C::new(c, 0.0)]]
}

fn ry(theta: f64) -> [[C; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C::new(c, 0.0), C::new(-s, 0.0)], [C::new(s, 0.0), C::new(c, 0.0)]]
}

fn rz(theta: f64) -> [[C; 2]; 2] {
    [[C::from_polar(1.0, -theta / 2.0), O], [O, C::from_polar(1.0, theta / 2.0)]]
}

fn controlled(u: [[C; 2]; 2]) -> [[C; 4]; 4] {
    [
        [I1, O, O, O],
        [O, I1, O, O],
        [O, O, u[0][0], u[0][1]],
        [O, O, u[1][0], u[1][1]],
    ]
}

pub fn gate_matrix(p: &Placement) -> GateMatrix {
    let theta = p.param.unwrap_or(0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match p.kind {
        GateKind::H => GateMatrix::One([[C::new(h, 0.0), C::new(h, 0.0)], [C::new(h, 0.0), C::new(-h, 0.0)]]),
        GateKind::X => GateMatrix::One([[O, I1], [I1, O]]),
        GateKind::Id => GateMatrix::One([[I1, O], [O, I1]]),
        GateKind::Sx => GateMatrix::One([
            [C::new(0.5, 0.5), C::new(0.5, -0.5)],
            [C::new(0.5, -0.5), C::new(0.5, 0.5)],
        ]),
        GateKind::Rx => GateMatrix::One(rx(theta)),
        GateKind::Ry => GateMatrix::One(ry(theta)),
        GateKind::Rz => GateMatrix::One(rz(theta)),
        GateKind::Cx => GateMatrix::Two(controlled([[O, I1], [I1, O]])),
        GateKind::Crx => GateMatrix::Two(controlled(rx(theta))),
        GateKind::Cry => GateMatrix::Two(controlled(ry(theta))),
        GateKind::Cz => GateMatrix::Two(controlled([[I1, O], [O, -I1]])),
        GateKind::Swap => GateMatrix::Two([
            [I1, O, O, O],
            [O, O, I1, O],
            [O, I1, O, O],
            [O, O, O, I1],
        ]),
        GateKind::Rzz => {
            let (m, p) = (C::from_polar(1.0, -theta / 2.0), C::from_polar(1.0, theta / 2.0));
            GateMatrix::Two([[m, O, O, O], [O, p, O, O], [O, O, p, O], [O, O, O, m]])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind::*;

    fn unitary_defect(m: &GateMatrix) -> f64 {
        let (n, get): (usize, Box<dyn Fn(usize, usize) -> C>) = match m {
            GateMatrix::One(u) => (2, Box::new(move |i, j| u[i][j])),
            GateMatrix::Two(u) => (4, Box::new(move |i, j| u[i][j])),
        };
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: C = (0..n).map(|k| get(k, i).conj() * get(k, j)).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - C::new(want, 0.0)).norm());
            }
        }
        worst
    }

    #[test]
    fn all_gates_are_unitary() {
        for kind in crate::circuit::GateKind::ALL {
            let qubits = (0..kind.arity()).collect();
            let param = kind.is_parameterized().then_some(0.731);
            let m = gate_matrix(&Placement::new(kind, qubits, param));
            assert!(unitary_defect(&m) < 1e-14, "{kind}");
        }
    }

    #[test]
    fn sx_squares_to_x() {
        let GateMatrix::One(s) = gate_matrix(&Placement::single(Sx, 0)) else { unreachable!() };
        let sq = |i: usize, j: usize| s[i][0] * s[0][j] + s[i][1] * s[1][j];
        assert!((sq(0, 1) - I1).norm() < 1e-15 && (sq(1, 0) - I1).norm() < 1e-15);
        assert!(sq(0, 0).norm() < 1e-15 && sq(1, 1).norm() < 1e-15);
    }
}
