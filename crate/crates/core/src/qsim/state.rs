use num_complex::Complex64;

use super::{SimError, MAX_QUBITS};
use crate::circ::{Circuit, Gate};

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0⟩
    pub fn zero(n_qubits: usize) -> Result<StateVector, SimError> {
        StateVector::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<StateVector, SimError> {
        if n_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(SimError::IndexOutOfRange { index, n_qubits });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Wraps raw amplitudes; they must already have unit norm (within 1e-9).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<StateVector, SimError> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(SimError::BadLength(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n_qubits));
        }
        let state = StateVector { n_qubits, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Real amplitudes, normalized on the way in.
    pub fn from_real(values: &[f64]) -> Result<StateVector, SimError> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(SimError::NotNormalized(norm));
        }
        StateVector::from_amplitudes(
            values
                .iter()
                .map(|v| Complex64::new(v / norm, 0.0))
                .collect(),
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Bit mask of `qubit` inside an amplitude index.
    pub fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check(&self, qubit: usize) -> Result<(), SimError> {
        if qubit < self.n_qubits {
            Ok(())
        } else {
            Err(SimError::IndexOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            })
        }
    }

    /// Applies a row-major 2x2 matrix to `qubit`.
    pub fn apply_matrix1(&mut self, qubit: usize, m: &[Complex64; 4]) -> Result<(), SimError> {
        self.check(qubit)?;
        let mask = self.mask(qubit);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = m[0] * a0 + m[1] * a1;
                self.amps[i | mask] = m[2] * a0 + m[3] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<(), SimError> {
        self.check(control)?;
        self.check(target)?;
        if control == target {
            return Err(SimError::EqualControlTarget(control));
        }
        let (cm, tm) = (self.mask(control), self.mask(target));
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<(), SimError> {
        match *gate {
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
            Gate::Single { qubit, .. } | Gate::Ry { qubit, .. } => {
                let m = gate.matrix1().expect("single-qubit gate");
                self.apply_matrix1(qubit, &m)
            }
        }
    }

    /// Born probability that `qubit` reads `outcome`.
    pub fn outcome_probability(&self, qubit: usize, outcome: u8) -> Result<f64, SimError> {
        self.check(qubit)?;
        let mask = self.mask(qubit);
        let want = if outcome == 0 { 0 } else { mask };
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Amplitudes of `qubit` given the other qubits' configuration with the
    /// largest weight. Returns the normalized pair and the weight outside that
    /// configuration (zero for a product state).
    pub fn qubit_amplitudes(&self, qubit: usize) -> Result<([Complex64; 2], f64), SimError> {
        self.check(qubit)?;
        let mask = self.mask(qubit);
        let (best, weight) = (0..self.amps.len())
            .filter(|i| i & mask == 0)
            .map(|i| (i, self.amps[i].norm_sqr() + self.amps[i | mask].norm_sqr()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let norm = weight.sqrt();
        let pair = [self.amps[best] / norm, self.amps[best | mask] / norm];
        let total: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        Ok((pair, (total - weight).max(0.0)))
    }
}

/// Applies one gate and returns the new state.
pub fn apply_gate(mut state: StateVector, gate: &Gate) -> Result<StateVector, SimError> {
    state.apply(gate)?;
    Ok(state)
}

pub fn run_statevector(circuit: &Circuit, initial: StateVector) -> Result<StateVector, SimError> {
    if circuit.n_qubits() != initial.n_qubits() {
        return Err(SimError::QubitMismatch {
            circuit: circuit.n_qubits(),
            state: initial.n_qubits(),
        });
    }
    circuit.validate()?;
    let mut state = initial;
    for gate in circuit.gates() {
        state.apply(gate)?;
    }
    Ok(state)
}

/// Projects `qubit` onto `outcome`, renormalizes, and reports the Born probability.
pub fn postselect(
    state: &StateVector,
    qubit: usize,
    outcome: u8,
) -> Result<(StateVector, f64), SimError> {
    let p = state.outcome_probability(qubit, outcome)?;
    if p <= 1e-12 {
        return Err(SimError::ZeroProbabilityBranch);
    }
    let mask = state.mask(qubit);
    let want = if outcome == 0 { 0 } else { mask };
    let scale = 1.0 / p.sqrt();
    let amps = state
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if i & mask == want {
                a * scale
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok((
        StateVector {
            n_qubits: state.n_qubits,
            amps,
        },
        p,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circ::CliffordT;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &StateVector, b: &[Complex64], tol: f64) -> bool {
        a.amplitudes()
            .iter()
            .zip(b)
            .all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn hadamard_on_zero() {
        let s = apply_gate(StateVector::zero(1).unwrap(), &Gate::h(0)).unwrap();
        assert!(close(
            &s,
            &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
            1e-15
        ));
    }

    #[test]
    fn x_on_zero() {
        let s = apply_gate(StateVector::zero(1).unwrap(), &Gate::x(0)).unwrap();
        assert!(close(&s, &[c(0.0, 0.0), c(1.0, 0.0)], 1e-15));
    }

    #[test]
    fn t_adds_quarter_phase() {
        let plus = StateVector::from_real(&[1.0, 1.0]).unwrap();
        let s = apply_gate(plus, &Gate::t(0)).unwrap();
        let w = Complex64::from_polar(FRAC_1_SQRT_2, std::f64::consts::FRAC_PI_4);
        assert!(close(&s, &[c(FRAC_1_SQRT_2, 0.0), w], 1e-15));
    }

    #[test]
    fn bad_gate_indices() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(
            apply_gate(s.clone(), &Gate::h(2)),
            Err(SimError::IndexOutOfRange { index: 2, .. })
        ));
        assert_eq!(
            apply_gate(s, &Gate::cnot(1, 1)),
            Err(SimError::EqualControlTarget(1))
        );
    }

    #[test]
    fn bit_order_leftmost_is_qubit_zero() {
        // X on qubit 0 of |00⟩ gives |10⟩ = index 2.
        let s = apply_gate(StateVector::zero(2).unwrap(), &Gate::x(0)).unwrap();
        assert_eq!(s.amplitudes()[2], c(1.0, 0.0));
    }

    #[test]
    fn empty_circuit_is_identity() {
        let s = run_statevector(&Circuit::new(2), StateVector::zero(2).unwrap()).unwrap();
        assert_eq!(s, StateVector::zero(2).unwrap());
    }

    #[test]
    fn bell_circuit() {
        let circuit = Circuit::from_gates(2, vec![Gate::h(0), Gate::cnot(0, 1)]).unwrap();
        let s = run_statevector(&circuit, StateVector::zero(2).unwrap()).unwrap();
        let h = c(FRAC_1_SQRT_2, 0.0);
        assert!(close(&s, &[h, c(0.0, 0.0), c(0.0, 0.0), h], 1e-15));
    }

    #[test]
    fn run_rejects_mismatched_width() {
        let circuit = Circuit::new(3);
        assert_eq!(
            run_statevector(&circuit, StateVector::zero(2).unwrap()),
            Err(SimError::QubitMismatch {
                circuit: 3,
                state: 2
            })
        );
    }

    #[test]
    fn postselect_bell() {
        let bell = StateVector::from_real(&[1.0, 0.0, 0.0, 1.0]).unwrap();
        let (s, p) = postselect(&bell, 1, 1).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(close(
            &s,
            &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            1e-15
        ));
    }

    #[test]
    fn postselect_zero_branch() {
        let zero = StateVector::zero(1).unwrap();
        assert_eq!(
            postselect(&zero, 0, 1),
            Err(SimError::ZeroProbabilityBranch)
        );
    }

    #[test]
    fn from_amplitudes_checks() {
        assert_eq!(
            StateVector::from_amplitudes(vec![c(1.0, 0.0); 3]),
            Err(SimError::BadLength(3))
        );
        assert!(matches!(
            StateVector::from_amplitudes(vec![c(1.0, 0.0); 2]),
            Err(SimError::NotNormalized(_))
        ));
        assert!(StateVector::zero(11).is_err());
    }

    #[test]
    fn qubit_amplitudes_of_product_state() {
        // (|0⟩ - |1⟩)/√2 ⊗ |1⟩
        let s = StateVector::from_real(&[0.0, 1.0, 0.0, -1.0]).unwrap();
        let (pair, leak) = s.qubit_amplitudes(0).unwrap();
        assert!(leak < 1e-15);
        assert!((pair[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((pair[1] + c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    fn arb_state(n: usize) -> impl Strategy<Value = StateVector> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
            "nonzero",
            |v| {
                let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
                (norm > 1e-3).then(|| {
                    StateVector::from_amplitudes(
                        v.iter().map(|(a, b)| c(a / norm, b / norm)).collect(),
                    )
                    .unwrap()
                })
            },
        )
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        prop_oneof![
            (0..8usize, 0..n).prop_map(|(k, q)| CliffordT::ALL[k].on(q)),
            (0..n, -7.0f64..7.0).prop_map(|(q, a)| Gate::ry(q, a)),
            (0..n, 1..n).prop_map(move |(c, d)| Gate::cnot(c, (c + d) % n)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn gates_preserve_norm((s, g) in (2usize..5).prop_flat_map(|n| (arb_state(n), arb_gate(n)))) {
            let before = s.norm();
            let after = apply_gate(s, &g).unwrap().norm();
            prop_assert!((after - before).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn postselect_branches_sum_to_one(s in (1usize..5).prop_flat_map(arb_state), q in 0usize..4) {
            let q = q % s.n_qubits();
            let p0 = s.outcome_probability(q, 0).unwrap();
            let p1 = s.outcome_probability(q, 1).unwrap();
            prop_assert!((p0 + p1 - 1.0).abs() < 1e-12);
            if p1 > 1e-12 {
                let (post, p) = postselect(&s, q, 1).unwrap();
                prop_assert!((p - p1).abs() < 1e-15);
                prop_assert!((post.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
