//! Circuit intermediate representation and the rewrite passes that bring a
//! circuit onto a star-coupled, Clifford+T device.

mod passes;
mod text;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub use passes::{
    basis_change, decompose_cry, legalize_star, reverse_cnot, rz, substitute_ry,
    uniformly_controlled_ry, RyApproximations,
};
pub use text::{emit_text, parse_text, ParseError, ParseErrorKind};

/// Absolute tolerance used when matching RY angles against an approximation table.
pub const ANGLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircError {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit circuit")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("CNOT control and target are both q{0}")]
    EqualControlTarget(usize),
    #[error("RY angle is not finite")]
    NonFiniteAngle,
    #[error("CNOT q{control} -> q{target} does not touch the star center q{center}")]
    UnroutableCnot {
        control: usize,
        target: usize,
        center: usize,
    },
    #[error("no Clifford+T approximation supplied for RY({0})")]
    MissingApproximation(f64),
    #[error("star center q{center} out of range for a {n_qubits}-qubit circuit")]
    BadTopology { center: usize, n_qubits: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// The single-qubit Clifford+T alphabet. The derived ordering is the
/// lexicographic order used for tie-breaking in synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CliffordT {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
}

impl CliffordT {
    pub const ALL: [CliffordT; 8] = [
        CliffordT::X,
        CliffordT::Y,
        CliffordT::Z,
        CliffordT::H,
        CliffordT::S,
        CliffordT::Sdg,
        CliffordT::T,
        CliffordT::Tdg,
    ];

    pub fn on(self, qubit: usize) -> Gate {
        Gate::Single { op: self, qubit }
    }

    pub fn is_t_type(self) -> bool {
        matches!(self, CliffordT::T | CliffordT::Tdg)
    }

    pub fn inverse(self) -> CliffordT {
        match self {
            CliffordT::S => CliffordT::Sdg,
            CliffordT::Sdg => CliffordT::S,
            CliffordT::T => CliffordT::Tdg,
            CliffordT::Tdg => CliffordT::T,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CliffordT::X => "x",
            CliffordT::Y => "y",
            CliffordT::Z => "z",
            CliffordT::H => "h",
            CliffordT::S => "s",
            CliffordT::Sdg => "sdg",
            CliffordT::T => "t",
            CliffordT::Tdg => "tdg",
        }
    }

    pub fn from_name(name: &str) -> Option<CliffordT> {
        CliffordT::ALL.into_iter().find(|op| op.name() == name)
    }

    /// Row-major 2x2 matrix.
    pub fn matrix(self) -> [Complex64; 4] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        match self {
            CliffordT::X => [o, l, l, o],
            CliffordT::Y => [o, -i, i, o],
            CliffordT::Z => [l, o, o, -l],
            CliffordT::H => [h, h, h, -h],
            CliffordT::S => [l, o, o, i],
            CliffordT::Sdg => [l, o, o, -i],
            CliffordT::T => [l, o, o, w],
            CliffordT::Tdg => [l, o, o, w.conj()],
        }
    }
}

impl fmt::Display for CliffordT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// R_y(angle) = exp(-i angle Y / 2), row-major.
pub fn ry_matrix(angle: f64) -> [Complex64; 4] {
    let (s, c) = (angle / 2.0).sin_cos();
    [
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Single { op: CliffordT, qubit: usize },
    Ry { qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn x(q: usize) -> Gate {
        CliffordT::X.on(q)
    }
    pub fn y(q: usize) -> Gate {
        CliffordT::Y.on(q)
    }
    pub fn z(q: usize) -> Gate {
        CliffordT::Z.on(q)
    }
    pub fn h(q: usize) -> Gate {
        CliffordT::H.on(q)
    }
    pub fn s(q: usize) -> Gate {
        CliffordT::S.on(q)
    }
    pub fn sdg(q: usize) -> Gate {
        CliffordT::Sdg.on(q)
    }
    pub fn t(q: usize) -> Gate {
        CliffordT::T.on(q)
    }
    pub fn tdg(q: usize) -> Gate {
        CliffordT::Tdg.on(q)
    }
    pub fn ry(qubit: usize, angle: f64) -> Gate {
        Gate::Ry { qubit, angle }
    }
    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::Cnot { control, target }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Single { qubit, .. } | Gate::Ry { qubit, .. } => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn max_qubit(&self) -> usize {
        match *self {
            Gate::Single { qubit, .. } | Gate::Ry { qubit, .. } => qubit,
            Gate::Cnot { control, target } => control.max(target),
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Single { op, qubit } => Gate::Single {
                op: op.inverse(),
                qubit,
            },
            Gate::Ry { qubit, angle } => Gate::Ry {
                qubit,
                angle: -angle,
            },
            cnot @ Gate::Cnot { .. } => cnot,
        }
    }

    /// 2x2 matrix for single-qubit gates, `None` for CNOT.
    pub fn matrix1(&self) -> Option<[Complex64; 4]> {
        match *self {
            Gate::Single { op, .. } => Some(op.matrix()),
            Gate::Ry { angle, .. } => Some(ry_matrix(angle)),
            Gate::Cnot { .. } => None,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<(), CircError> {
        for q in self.qubits() {
            if q >= n_qubits {
                return Err(CircError::IndexOutOfRange { index: q, n_qubits });
            }
        }
        match *self {
            Gate::Cnot { control, target } if control == target => {
                Err(CircError::EqualControlTarget(control))
            }
            Gate::Ry { angle, .. } if !angle.is_finite() => Err(CircError::NonFiniteAngle),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    State,
    Eigen,
    Ancilla,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::State => "state",
            Role::Eigen => "eigen",
            Role::Ancilla => "ancilla",
        }
    }

    pub fn from_name(name: &str) -> Option<Role> {
        match name {
            "state" => Some(Role::State),
            "eigen" => Some(Role::Eigen),
            "ancilla" => Some(Role::Ancilla),
            _ => None,
        }
    }
}

/// Measurement basis for Pauli tomography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    pub fn name(self) -> &'static str {
        match self {
            Basis::Z => "Z",
            Basis::X => "X",
            Basis::Y => "Y",
        }
    }

    pub fn from_name(name: &str) -> Option<Basis> {
        match name {
            "Z" | "z" => Some(Basis::Z),
            "X" | "x" => Some(Basis::X),
            "Y" | "y" => Some(Basis::Y),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    roles: BTreeMap<usize, Role>,
    measured: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Circuit {
        Circuit {
            n_qubits,
            ..Circuit::default()
        }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Circuit, CircError> {
        let mut circuit = Circuit::new(n_qubits);
        circuit.extend(gates)?;
        Ok(circuit)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn roles(&self) -> &BTreeMap<usize, Role> {
        &self.roles
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn qubit_with_role(&self, role: Role) -> Option<usize> {
        self.roles
            .iter()
            .find_map(|(&q, &r)| (r == role).then_some(q))
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircError> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<(), CircError> {
        for gate in gates {
            self.push(gate)?;
        }
        Ok(())
    }

    pub fn set_role(&mut self, qubit: usize, role: Role) -> Result<(), CircError> {
        self.check_index(qubit)?;
        self.roles.insert(qubit, role);
        Ok(())
    }

    pub fn add_measure(&mut self, qubit: usize) -> Result<(), CircError> {
        self.check_index(qubit)?;
        self.measured.push(qubit);
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CircError> {
        self.gates
            .iter()
            .try_for_each(|g| g.validate(self.n_qubits))?;
        self.roles
            .keys()
            .chain(self.measured.iter())
            .try_for_each(|&q| self.check_index(q))
    }

    pub fn count_cnots(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count()
    }

    pub fn count_ry(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Ry { .. }))
            .count()
    }

    pub fn count_t(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Single { op, .. } if op.is_t_type()))
            .count()
    }

    /// Same qubits, roles and measurements, different gate list.
    pub(crate) fn with_gates(&self, gates: Vec<Gate>) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates,
            roles: self.roles.clone(),
            measured: self.measured.clone(),
        }
    }

    /// The adjoint circuit: reversed order, each gate inverted.
    pub fn inverse(&self) -> Circuit {
        self.with_gates(self.gates.iter().rev().map(Gate::inverse).collect())
    }

    fn check_index(&self, qubit: usize) -> Result<(), CircError> {
        if qubit < self.n_qubits {
            Ok(())
        } else {
            Err(CircError::IndexOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Unconstrained,
    Star { center: usize },
}

impl Topology {
    pub fn validate(&self, n_qubits: usize) -> Result<(), CircError> {
        match *self {
            Topology::Star { center } if center >= n_qubits => {
                Err(CircError::BadTopology { center, n_qubits })
            }
            _ => Ok(()),
        }
    }
}
