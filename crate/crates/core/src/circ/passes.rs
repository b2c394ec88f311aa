use super::{Basis, CircError, Circuit, CliffordT, Gate, Topology, ANGLE_TOLERANCE};

fn distinct(control: usize, target: usize) -> Result<(), CircError> {
    if control == target {
        Err(CircError::EqualControlTarget(control))
    } else {
        Ok(())
    }
}

/// Controlled-R_y(theta) from CNOTs and half-angle rotations.
///
/// The order is fixed as `RY(θ/2) t; CNOT c→t; RY(−θ/2) t; CNOT c→t`: with the
/// control at 0 the rotations cancel, with the control at 1 the CNOTs flip the
/// sign of the second rotation and the two halves add up to R_y(θ).
pub fn decompose_cry(theta: f64, control: usize, target: usize) -> Result<Vec<Gate>, CircError> {
    distinct(control, target)?;
    if !theta.is_finite() {
        return Err(CircError::NonFiniteAngle);
    }
    Ok(vec![
        Gate::ry(target, theta / 2.0),
        Gate::cnot(control, target),
        Gate::ry(target, -theta / 2.0),
        Gate::cnot(control, target),
    ])
}

/// CNOT c→t written with the opposite native direction, conjugated by Hadamards.
pub fn reverse_cnot(control: usize, target: usize) -> Result<Vec<Gate>, CircError> {
    distinct(control, target)?;
    Ok(vec![
        Gate::h(control),
        Gate::h(target),
        Gate::cnot(target, control),
        Gate::h(control),
        Gate::h(target),
    ])
}

/// Rewrites every CNOT so that its target is the star center.
///
/// CNOTs between two leaves are rejected: a star has no leaf-leaf coupling and
/// SWAP routing is not attempted.
pub fn legalize_star(circuit: &Circuit, topology: Topology) -> Result<Circuit, CircError> {
    topology.validate(circuit.n_qubits())?;
    let center = match topology {
        Topology::Unconstrained => return Ok(circuit.clone()),
        Topology::Star { center } => center,
    };
    let mut gates = Vec::with_capacity(circuit.gates().len());
    for gate in circuit.gates() {
        match *gate {
            Gate::Cnot { target, .. } if target == center => gates.push(*gate),
            Gate::Cnot { control, target } if control == center => {
                gates.extend(reverse_cnot(control, target)?)
            }
            Gate::Cnot { control, target } => {
                return Err(CircError::UnroutableCnot {
                    control,
                    target,
                    center,
                })
            }
            _ => gates.push(*gate),
        }
    }
    Ok(circuit.with_gates(gates))
}

/// Table of Clifford+T sequences standing in for specific RY angles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RyApproximations {
    entries: Vec<(f64, Vec<CliffordT>)>,
}

impl RyApproximations {
    pub fn new() -> RyApproximations {
        RyApproximations::default()
    }

    /// Adds or replaces the sequence for `angle`.
    pub fn insert(&mut self, angle: f64, sequence: Vec<CliffordT>) {
        match self
            .entries
            .iter_mut()
            .find(|(a, _)| (a - angle).abs() <= ANGLE_TOLERANCE)
        {
            Some(entry) => entry.1 = sequence,
            None => self.entries.push((angle, sequence)),
        }
    }

    pub fn get(&self, angle: f64) -> Option<&[CliffordT]> {
        self.entries
            .iter()
            .find(|(a, _)| (a - angle).abs() <= ANGLE_TOLERANCE)
            .map(|(_, seq)| seq.as_slice())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[CliffordT])> {
        self.entries.iter().map(|(a, s)| (*a, s.as_slice()))
    }
}

/// Replaces every RY gate by its tabulated Clifford+T sequence.
pub fn substitute_ry(
    circuit: &Circuit,
    approximations: &RyApproximations,
) -> Result<Circuit, CircError> {
    let mut gates = Vec::with_capacity(circuit.gates().len());
    for gate in circuit.gates() {
        match *gate {
            Gate::Ry { qubit, angle } => {
                let seq = approximations
                    .get(angle)
                    .ok_or(CircError::MissingApproximation(angle))?;
                gates.extend(seq.iter().map(|op| op.on(qubit)));
            }
            _ => gates.push(*gate),
        }
    }
    Ok(circuit.with_gates(gates))
}

/// Rotation applied before a computational-basis measurement so that it
/// measures the requested Pauli operator.
pub fn basis_change(basis: Basis, qubit: usize) -> Vec<Gate> {
    match basis {
        Basis::Z => vec![],
        Basis::X => vec![Gate::h(qubit)],
        Basis::Y => vec![Gate::sdg(qubit), Gate::h(qubit)],
    }
}

/// R_z(phi) = exp(-i phi Z / 2) expressed as `H S† RY(−φ) S H` (application order).
pub fn rz(qubit: usize, phi: f64) -> Vec<Gate> {
    vec![
        Gate::h(qubit),
        Gate::sdg(qubit),
        Gate::ry(qubit, -phi),
        Gate::s(qubit),
        Gate::h(qubit),
    ]
}

/// Uniformly controlled R_y: for control value `k` (bit `i` of `k` read from
/// `controls[i]`) the target receives R_y(`angles[k]`).
///
/// Recursive split on the last control: rotate by the branch mean, flip with a
/// CNOT, rotate by the half difference, flip back. One control reduces to
/// [`decompose_cry`]'s layout.
pub fn uniformly_controlled_ry(
    controls: &[usize],
    target: usize,
    angles: &[f64],
) -> Result<Vec<Gate>, CircError> {
    assert_eq!(
        angles.len(),
        1 << controls.len(),
        "one angle per control value"
    );
    for &c in controls {
        distinct(c, target)?;
    }
    let mut gates = Vec::new();
    ucry_into(controls, target, angles, &mut gates);
    Ok(gates)
}

fn ucry_into(controls: &[usize], target: usize, angles: &[f64], out: &mut Vec<Gate>) {
    let Some((&last, rest)) = controls.split_last() else {
        if angles[0] != 0.0 {
            out.push(Gate::ry(target, angles[0]));
        }
        return;
    };
    let half = angles.len() / 2;
    let (low, high) = angles.split_at(half);
    if low.iter().zip(high).all(|(a, b)| a == b) {
        // The last control does not matter.
        ucry_into(rest, target, low, out);
        return;
    }
    let mean: Vec<f64> = low.iter().zip(high).map(|(a, b)| (a + b) / 2.0).collect();
    let diff: Vec<f64> = low.iter().zip(high).map(|(a, b)| (a - b) / 2.0).collect();
    ucry_into(rest, target, &mean, out);
    out.push(Gate::cnot(last, target));
    ucry_into(rest, target, &diff, out);
    out.push(Gate::cnot(last, target));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{circuit_unitary, Unitary};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn unitary_of(n: usize, gates: Vec<Gate>) -> Unitary {
        circuit_unitary(&Circuit::from_gates(n, gates).unwrap()).unwrap()
    }

    /// diag(I, R_y(theta)) with qubit 0 (the leftmost) as control.
    fn controlled_ry_direct(theta: f64) -> Unitary {
        let r = crate::circ::ry_matrix(theta);
        let mut u = Unitary::identity(4);
        u.set(2, 2, r[0]);
        u.set(2, 3, r[1]);
        u.set(3, 2, r[2]);
        u.set(3, 3, r[3]);
        u
    }

    #[test]
    fn cry_zero_is_identity() {
        let u = unitary_of(2, decompose_cry(0.0, 0, 1).unwrap());
        assert!(u.max_abs_diff(&Unitary::identity(4)) < 1e-12);
    }

    #[test]
    fn cry_matches_block_matrix() {
        let theta = (-57.34f64).to_radians();
        let gates = decompose_cry(theta, 0, 1).unwrap();
        assert_eq!(
            gates
                .iter()
                .filter(|g| matches!(g, Gate::Cnot { .. }))
                .count(),
            2
        );
        let u = unitary_of(2, gates);
        assert!(u.max_abs_diff(&controlled_ry_direct(theta)) < 1e-10);
    }

    #[test]
    fn cry_two_pi_is_z_on_control() {
        let u = unitary_of(2, decompose_cry(2.0 * PI, 0, 1).unwrap());
        let mut expected = Unitary::identity(4);
        expected.set(2, 2, Complex64::new(-1.0, 0.0));
        expected.set(3, 3, Complex64::new(-1.0, 0.0));
        assert!(u.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn cry_control_zero_block_is_identity() {
        for theta in [0.3, -1.2, 2.9] {
            let u = unitary_of(2, decompose_cry(theta, 0, 1).unwrap());
            for r in 0..2 {
                for c in 0..2 {
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!((u.get(r, c) - Complex64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn cry_rejects_equal_indices() {
        assert_eq!(
            decompose_cry(1.0, 2, 2),
            Err(CircError::EqualControlTarget(2))
        );
        assert_eq!(reverse_cnot(0, 0), Err(CircError::EqualControlTarget(0)));
    }

    #[test]
    fn reversed_cnot_is_cnot() {
        for (c, t) in [(0, 1), (1, 0)] {
            let seq = reverse_cnot(c, t).unwrap();
            assert_eq!(seq.len(), 5);
            assert_eq!(seq[2], Gate::cnot(t, c));
            let direct = unitary_of(2, vec![Gate::cnot(c, t)]);
            assert!(unitary_of(2, seq).max_abs_diff(&direct) < 1e-12);
        }
    }

    #[test]
    fn reversing_twice_restores_direction() {
        let mut gates = Vec::new();
        for g in reverse_cnot(0, 1).unwrap() {
            match g {
                Gate::Cnot { control, target } => {
                    gates.extend(reverse_cnot(control, target).unwrap())
                }
                other => gates.push(other),
            }
        }
        assert!(gates.contains(&Gate::cnot(0, 1)));
        let direct = unitary_of(2, vec![Gate::cnot(0, 1)]);
        assert!(unitary_of(2, gates).max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn legal_circuit_unchanged() {
        let c =
            Circuit::from_gates(3, vec![Gate::h(0), Gate::cnot(0, 1), Gate::cnot(2, 1)]).unwrap();
        assert_eq!(legalize_star(&c, Topology::Star { center: 1 }).unwrap(), c);
    }

    #[test]
    fn center_control_gets_reversed() {
        let c = Circuit::from_gates(2, vec![Gate::cnot(1, 0)]).unwrap();
        let out = legalize_star(&c, Topology::Star { center: 1 }).unwrap();
        assert_eq!(out.gates().len(), 5);
        for g in out.gates() {
            if let Gate::Cnot { target, .. } = g {
                assert_eq!(*target, 1);
            }
        }
        assert!(
            circuit_unitary(&out)
                .unwrap()
                .phase_distance(&circuit_unitary(&c).unwrap())
                < 1e-9
        );
    }

    #[test]
    fn leaf_to_leaf_cnot_is_unroutable() {
        let c = Circuit::from_gates(3, vec![Gate::cnot(0, 2)]).unwrap();
        assert_eq!(
            legalize_star(&c, Topology::Star { center: 1 }),
            Err(CircError::UnroutableCnot {
                control: 0,
                target: 2,
                center: 1
            })
        );
    }

    #[test]
    fn substitution_without_ry_is_identity() {
        let c = Circuit::from_gates(2, vec![Gate::h(0), Gate::cnot(0, 1), Gate::t(1)]).unwrap();
        assert_eq!(substitute_ry(&c, &RyApproximations::new()).unwrap(), c);
    }

    #[test]
    fn substitution_requires_every_angle() {
        let c = Circuit::from_gates(1, vec![Gate::ry(0, 0.25)]).unwrap();
        let mut table = RyApproximations::new();
        table.insert(0.5, vec![CliffordT::H]);
        assert_eq!(
            substitute_ry(&c, &table),
            Err(CircError::MissingApproximation(0.25))
        );
        table.insert(0.25 + 5e-10, vec![CliffordT::T]);
        let out = substitute_ry(&c, &table).unwrap();
        assert_eq!(out.gates(), &[Gate::t(0)]);
        assert_eq!(out.count_ry(), 0);
    }

    #[test]
    fn exact_clifford_substitutions_preserve_unitary() {
        // RY(π/2) = X·H and RY(−π/2) = H·X exactly; RY(π) = −iY.
        let mut table = RyApproximations::new();
        table.insert(PI / 2.0, vec![CliffordT::H, CliffordT::X]);
        table.insert(-PI / 2.0, vec![CliffordT::X, CliffordT::H]);
        table.insert(PI, vec![CliffordT::Y]);
        let c = Circuit::from_gates(
            2,
            vec![
                Gate::ry(0, PI / 2.0),
                Gate::cnot(0, 1),
                Gate::ry(1, -PI / 2.0),
                Gate::ry(0, PI),
            ],
        )
        .unwrap();
        let out = substitute_ry(&c, &table).unwrap();
        let d = circuit_unitary(&c)
            .unwrap()
            .phase_distance(&circuit_unitary(&out).unwrap());
        assert!(d < 1e-12, "distance {d}");
    }

    #[test]
    fn basis_changes() {
        assert!(basis_change(Basis::Z, 0).is_empty());
        assert_eq!(basis_change(Basis::X, 2), vec![Gate::h(2)]);
        assert_eq!(basis_change(Basis::Y, 1), vec![Gate::sdg(1), Gate::h(1)]);
    }

    #[test]
    fn rz_matches_definition() {
        for phi in [0.0, 0.7, -2.1, PI] {
            let u = unitary_of(1, rz(0, phi));
            let mut want = Unitary::identity(2);
            want.set(0, 0, Complex64::from_polar(1.0, -phi / 2.0));
            want.set(1, 1, Complex64::from_polar(1.0, phi / 2.0));
            assert!(u.max_abs_diff(&want) < 1e-12, "phi {phi}");
        }
    }

    #[test]
    fn uniformly_controlled_ry_matches_block_diagonal() {
        // Controls q1 (bit 0) and q2 (bit 1), target q0.
        let angles = [0.3, -1.1, 0.0, 2.4];
        let gates = uniformly_controlled_ry(&[1, 2], 0, &angles).unwrap();
        let u = unitary_of(3, gates);
        for (k, &angle) in angles.iter().enumerate() {
            let (b1, b2) = (k & 1, (k >> 1) & 1);
            let r = crate::circ::ry_matrix(angle);
            for t_out in 0..2 {
                for t_in in 0..2 {
                    // index = q0 q1 q2 with q0 most significant
                    let row = (t_out << 2) | (b1 << 1) | b2;
                    let col = (t_in << 2) | (b1 << 1) | b2;
                    assert!((u.get(row, col) - r[t_out * 2 + t_in]).norm() < 1e-12);
                }
            }
        }
        assert!(u.is_unitary(1e-10));
    }

    #[test]
    fn single_control_ucry_is_cry_layout() {
        let theta = 0.8;
        assert_eq!(
            uniformly_controlled_ry(&[0], 1, &[0.0, theta]).unwrap(),
            decompose_cry(theta, 0, 1).unwrap()
        );
    }
}
