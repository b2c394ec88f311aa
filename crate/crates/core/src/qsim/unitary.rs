use std::ops::Mul;

use num_complex::Complex64;

use super::{SimError, StateVector};
use crate::circ::Circuit;

/// Largest circuit whose full matrix [`circuit_unitary`] will build.
pub const MAX_UNITARY_QUBITS: usize = 6;

/// Dense row-major complex matrix of dimension `dim x dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    dim: usize,
    entries: Vec<Complex64>,
}

impl Unitary {
    pub fn identity(dim: usize) -> Unitary {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Unitary { dim, entries }
    }

    /// Builds a matrix from row-major entries; panics if the length is not a square.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Unitary {
        assert_eq!(entries.len(), dim * dim, "entry count must be dim^2");
        Unitary { dim, entries }
    }

    pub fn from_2x2(m: [Complex64; 4]) -> Unitary {
        Unitary {
            dim: 2,
            entries: m.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Unitary {
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Unitary { dim: d, entries }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Unitary {
        Unitary {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Unitary) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// U†U = I entrywise within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        (&self.adjoint() * self).max_abs_diff(&Unitary::identity(self.dim)) <= tol
    }

    /// |Tr(self† other)| / dim: 1 for equal-up-to-phase, 0 for orthogonal.
    pub fn similarity(&self, other: &Unitary) -> f64 {
        assert_eq!(self.dim, other.dim);
        let tr: Complex64 = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum();
        tr.norm() / self.dim as f64
    }

    /// Global-phase-invariant distance 1 − |Tr(U†V)|/dim.
    pub fn phase_distance(&self, other: &Unitary) -> f64 {
        1.0 - self.similarity(other)
    }

    pub fn apply(&self, state: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) * state[c]).sum())
            .collect()
    }
}

impl Mul for &Unitary {
    type Output = Unitary;

    fn mul(self, rhs: &Unitary) -> Unitary {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * rhs.entries[k * d + c];
                }
            }
        }
        Unitary { dim: d, entries }
    }
}

/// The matrix of a whole circuit, built column by column from basis states.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Unitary, SimError> {
    let n = circuit.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(SimError::TooManyQubits(n));
    }
    circuit.validate()?;
    let dim = 1usize << n;
    let mut u = Unitary::identity(dim);
    for col in 0..dim {
        let mut state = StateVector::basis(n, col)?;
        for gate in circuit.gates() {
            state.apply(gate)?;
        }
        for (row, amp) in state.amplitudes().iter().enumerate() {
            u.set(row, col, *amp);
        }
    }
    Ok(u)
}
