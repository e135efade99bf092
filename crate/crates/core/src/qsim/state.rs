use num_complex::Complex64 as C;

use super::gates::{gate_matrix, GateMatrix};
use crate::circuit::{Circuit, Placement};
use crate::error::{Error, Result};

/// Amplitudes over `2^n` basis states; qubit `q` is bit `q` of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![C::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = C::new(1.0, 0.0);
        StateVector {
            num_qubits,
            amplitudes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨Z⟩ on one qubit.
    pub fn expect_z(&self, qubit: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i >> qubit & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    pub fn apply(&mut self, placement: &Placement) -> Result<()> {
        for &q in &placement.qubits {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        match gate_matrix(placement) {
            GateMatrix::One(u) => self.apply_one(placement.qubits[0], &u),
            GateMatrix::Two(u) => self.apply_two(placement.qubits[0], placement.qubits[1], &u),
        }
        Ok(())
    }

    fn apply_one(&mut self, q: usize, u: &[[C; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
                self.amplitudes[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amplitudes[i | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    fn apply_two(&mut self, qa: usize, qb: usize, u: &[[C; 4]; 4]) {
        let (ba, bb) = (1usize << qa, 1usize << qb);
        for i in 0..self.amplitudes.len() {
            if i & (ba | bb) == 0 {
                let idx = [i, i | bb, i | ba, i | ba | bb];
                let v = idx.map(|k| self.amplitudes[k]);
                for (r, &k) in idx.iter().enumerate() {
                    self.amplitudes[k] = (0..4).map(|c| u[r][c] * v[c]).sum();
                }
            }
        }
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        for p in circuit.placements() {
            self.apply(p)?;
        }
        Ok(())
    }
}

/// `U|0…0⟩` for the circuit unitary `U`.
pub fn simulate(circuit: &Circuit) -> Result<StateVector> {
    let mut state = StateVector::zero(circuit.num_qubits());
    state.apply_circuit(circuit)?;
    Ok(state)
}

/// `|⟨GHZ_N|ψ⟩|²` with `|GHZ_N⟩ = (|0…0⟩ + |1…1⟩)/√2`.
///
/// Circuits that reference qubits outside the register score 0.
pub fn ghz_fidelity(circuit: &Circuit) -> f64 {
    match simulate(circuit) {
        Ok(state) => ghz_overlap(&state),
        Err(_) => 0.0,
    }
}

pub(crate) fn ghz_overlap(state: &StateVector) -> f64 {
    let a = state.amplitudes();
    let overlap = (a[0] + a[a.len() - 1]) * std::f64::consts::FRAC_1_SQRT_2;
    overlap.norm_sqr().clamp(0.0, 1.0)
}
