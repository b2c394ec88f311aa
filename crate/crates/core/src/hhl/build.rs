use std::f64::consts::{PI, TAU};

use super::{
    rotation_angle_exact, rotation_angle_replica, EigenDecomp, HhlError, LinearSystem, Matrix2,
    Mode, SolverConfig,
};
use crate::circ::{
    decompose_cry, legalize_star, rz, substitute_ry, uniformly_controlled_ry, Circuit, Gate, Role,
    RyApproximations,
};
use crate::qsim::{Unitary, MAX_QUBITS};
use crate::synth::{ry_approximations, ry_unitary, CliffordTSequence, SynthResult};

pub const STATE_QUBIT: usize = 0;
pub const EIGEN_QUBIT: usize = 1;
pub const ANCILLA_QUBIT: usize = 2;

const MATCH_TOLERANCE: f64 = 1e-12;

/// `[RY(2·atan2(b₂, b₁))]`, which takes |0⟩ to b₁|0⟩ + b₂|1⟩.
pub fn prepare_b(b_unit: [f64; 2], qubit: usize) -> Result<Vec<Gate>, HhlError> {
    if b_unit.iter().any(|v| !v.is_finite()) {
        return Err(HhlError::NonFinite);
    }
    let norm = b_unit[0].hypot(b_unit[1]);
    if (norm - 1.0).abs() > 1e-9 {
        return Err(HhlError::NotUnit(norm));
    }
    Ok(vec![Gate::ry(qubit, 2.0 * b_unit[1].atan2(b_unit[0]))])
}

fn approx_eq(a: &Matrix2, b: &Matrix2) -> bool {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .all(|(x, y)| (x - y).abs() <= MATCH_TOLERANCE)
}

/// Gates whose product is the real orthogonal matrix `r` up to global phase.
pub fn eigenbasis_gates(r: &Matrix2, qubit: usize) -> Vec<Gate> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    if approx_eq(r, &[[1.0, 0.0], [0.0, 1.0]]) {
        return vec![];
    }
    if approx_eq(r, &[[h, h], [h, -h]]) {
        return vec![Gate::h(qubit)];
    }
    let phi = 2.0 * r[1][0].atan2(r[0][0]);
    let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
    if det > 0.0 {
        // [[c, −s], [s, c]]
        vec![Gate::ry(qubit, phi)]
    } else {
        // [[c, s], [s, −c]] = R_y(φ)·Z
        vec![Gate::z(qubit), Gate::ry(qubit, phi)]
    }
}

fn inverse_gates(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().map(Gate::inverse).collect()
}

/// Eigenvalue branch the replica rotation acts on: the one carrying more of b.
fn replica_control_value(eig: &EigenDecomp, b_unit: [f64; 2]) -> usize {
    let beta = eig.coefficients(b_unit);
    usize::from(beta[1].abs() > beta[0].abs())
}

/// The three-qubit circuit: prepare b, rotate into the eigenbasis, copy the
/// eigenbasis index onto the eigenvalue qubit, rotate the ancilla, uncompute.
///
/// Exact mode rotates both branches by `2·asin(C/λᵢ)`. Replica mode rotates
/// only the branch with the larger |βᵢ| (X-conjugating the control when that
/// is branch 0) by the replica angle.
pub fn build_optimized_circuit(
    eig: &EigenDecomp,
    b_unit: [f64; 2],
    config: &SolverConfig,
) -> Result<Circuit, HhlError> {
    let mut c = Circuit::new(3);
    c.set_role(STATE_QUBIT, Role::State)?;
    c.set_role(EIGEN_QUBIT, Role::Eigen)?;
    c.set_role(ANCILLA_QUBIT, Role::Ancilla)?;
    c.extend(prepare_b(b_unit, STATE_QUBIT)?)?;
    let r = eigenbasis_gates(&eig.r, STATE_QUBIT);
    c.extend(r.iter().copied())?;
    c.push(Gate::cnot(STATE_QUBIT, EIGEN_QUBIT))?;
    match config.mode {
        Mode::Exact => {
            let cc = config.resolve_c(eig)?;
            let theta1 = rotation_angle_exact(eig.lambda1, cc)?;
            let theta2 = rotation_angle_exact(eig.lambda2, cc)?;
            c.extend(decompose_cry(theta2, EIGEN_QUBIT, ANCILLA_QUBIT)?)?;
            c.push(Gate::x(EIGEN_QUBIT))?;
            c.extend(decompose_cry(theta1, EIGEN_QUBIT, ANCILLA_QUBIT)?)?;
            c.push(Gate::x(EIGEN_QUBIT))?;
        }
        Mode::Replica => {
            let theta = rotation_angle_replica(eig, config.theta_override);
            if !theta.is_finite() {
                return Err(HhlError::NonFinite);
            }
            let v = replica_control_value(eig, b_unit);
            let p = (eig.coefficients(b_unit)[v] * (theta / 2.0).sin()).powi(2);
            if p < 1e-12 {
                return Err(HhlError::ZeroSuccess(p));
            }
            let cry = decompose_cry(theta, EIGEN_QUBIT, ANCILLA_QUBIT)?;
            if v == 0 {
                c.push(Gate::x(EIGEN_QUBIT))?;
                c.extend(cry)?;
                c.push(Gate::x(EIGEN_QUBIT))?;
            } else {
                c.extend(cry)?;
            }
        }
    }
    c.push(Gate::cnot(STATE_QUBIT, EIGEN_QUBIT))?;
    c.extend(inverse_gates(&r))?;
    c.add_measure(STATE_QUBIT)?;
    c.add_measure(ANCILLA_QUBIT)?;
    Ok(c)
}

/// A device-ready optimized circuit and the constant needed to rescale its output.
#[derive(Debug, Clone)]
pub struct SolverCircuit {
    pub circuit: Circuit,
    pub eig: EigenDecomp,
    /// Amplitude factor of the implemented inversion: post-selection leaves
    /// `c_effective · Σ βᵢ/λᵢ |uᵢ⟩` on the populated branches.
    pub c_effective: f64,
    /// Clifford+T words used for RY substitution, by angle.
    pub approximations: Vec<(f64, SynthResult)>,
}

impl SolverCircuit {
    pub fn state_qubit(&self) -> usize {
        STATE_QUBIT
    }

    pub fn ancilla(&self) -> usize {
        ANCILLA_QUBIT
    }
}

/// Builds the optimized circuit for `system`, substitutes Clifford+T words
/// (replica mode with a T budget), then legalizes onto the topology.
///
/// In replica mode the effective constant is read off the rotation actually
/// emitted, so substituted words rescale consistently.
pub fn compile_solver(
    system: &LinearSystem,
    config: &SolverConfig,
) -> Result<SolverCircuit, HhlError> {
    let eig = super::eigendecompose(system.a())?;
    let b_unit = system.b_unit()?;
    let raw = build_optimized_circuit(&eig, b_unit, config)?;
    let (circuit, table, approximations) = match (config.mode, config.t_budget) {
        (Mode::Replica, Some(budget)) => {
            let angles: Vec<f64> = raw
                .gates()
                .iter()
                .filter_map(|g| match *g {
                    Gate::Ry { angle, .. } => Some(angle),
                    _ => None,
                })
                .collect();
            let (table, results) = ry_approximations(&angles, budget)?;
            (substitute_ry(&raw, &table)?, Some(table), results)
        }
        _ => (raw, None, vec![]),
    };
    let circuit = legalize_star(&circuit, config.topology)?;
    let c_effective = match config.mode {
        Mode::Exact => config.resolve_c(&eig)?,
        Mode::Replica => {
            let theta = rotation_angle_replica(&eig, config.theta_override);
            let v = replica_control_value(&eig, b_unit);
            eig.lambdas()[v].abs() * active_branch_amplitude(theta, table.as_ref())
        }
    };
    Ok(SolverCircuit {
        circuit,
        eig,
        c_effective,
        approximations,
    })
}

/// |⟨1|W|0⟩| for the ancilla operator W = X·U(−θ/2)·X·U(θ/2) applied when
/// the CRY control fires, with U the emitted rotation or its substitute.
fn active_branch_amplitude(theta: f64, table: Option<&RyApproximations>) -> f64 {
    let rot = |angle: f64| match table.and_then(|t| t.get(angle)) {
        Some(seq) => CliffordTSequence::new(seq.to_vec()).unitary(),
        None => ry_unitary(angle),
    };
    let x = Unitary::from_2x2(crate::circ::CliffordT::X.matrix());
    let w = &(&(&x * &rot(-theta / 2.0)) * &x) * &rot(theta / 2.0);
    w.get(1, 0).norm()
}

/// Evolution time making both eigenphases λᵢ·t0/2π exact multiples of 2^-m.
///
/// Searches n₁ = 1..=2^m for an integer n₂ = n₁·λ₂/λ₁ (within 1e-9) whose
/// register value n₂ mod 2^m differs from n₁'s, unless the spectrum is
/// degenerate; then t0 = 2π·n₁/(2^m·λ₁).
pub fn choose_t0(eig: &EigenDecomp, m: usize) -> Result<f64, HhlError> {
    if !eig.is_positive_definite() {
        return Err(HhlError::NotPositiveDefinite);
    }
    if m == 0 || m + 2 > MAX_QUBITS {
        return Err(HhlError::QubitBudget(m + 2));
    }
    let size = 1u64 << m;
    let ratio = eig.lambda2 / eig.lambda1;
    for n1 in 1..=size {
        let n2f = n1 as f64 * ratio;
        let n2 = n2f.round();
        if n2 < 1.0 || (n2f - n2).abs() > 1e-9 * n2f.max(1.0) {
            continue;
        }
        if n1 % size != (n2 as u64) % size || eig.is_degenerate() {
            return Ok(TAU * n1 as f64 / (size as f64 * eig.lambda1));
        }
    }
    Err(HhlError::NoExactT0(m))
}

/// Register value λ·t0·2^m/2π mod 2^m, which must be an integer within 1e-9.
pub fn register_value(lambda: f64, t0: f64, m: usize) -> Result<usize, HhlError> {
    let phase = lambda * t0 / TAU * (1u64 << m) as f64;
    let n = phase.round();
    if !phase.is_finite() || (phase - n).abs() > 1e-9 * phase.abs().max(1.0) {
        return Err(HhlError::InexactT0(t0));
    }
    Ok((n as i64).rem_euclid(1i64 << m) as usize)
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// diag(1, 1, 1, e^{iγ}) up to global phase.
fn controlled_phase(gamma: f64, control: usize, target: usize, out: &mut Vec<Gate>) {
    if wrap_angle(gamma) == 0.0 {
        return;
    }
    out.extend(rz(control, gamma / 2.0));
    out.extend(rz(target, gamma / 2.0));
    out.push(Gate::cnot(control, target));
    out.extend(rz(target, -gamma / 2.0));
    out.push(Gate::cnot(control, target));
}

/// Controlled e^{iA·t}, written as r; controlled diag(e^{iλ₁t}, e^{iλ₂t}); r†.
fn controlled_evolution(eig: &EigenDecomp, t: f64, control: usize, target: usize) -> Vec<Gate> {
    let alpha = wrap_angle(eig.lambda1 * t);
    let beta = wrap_angle(eig.lambda2 * t);
    let r = eigenbasis_gates(&eig.r, target);
    let mut out = r.clone();
    if alpha != 0.0 {
        // e^{iα} on the control's |1⟩, as a phase gate on the control.
        out.extend(rz(control, alpha));
    }
    controlled_phase(beta - alpha, control, target, &mut out);
    out.extend(inverse_gates(&r));
    out
}

/// Fourier transform without the final swaps: for input |k⟩ (qubits[0] most
/// significant), qubits[l] ends up with relative phase 2π·k·2^(l−m).
fn qft_noswap(qubits: &[usize]) -> Vec<Gate> {
    let mut out = Vec::new();
    for (l, &q) in qubits.iter().enumerate() {
        out.push(Gate::h(q));
        for (k, &c) in qubits.iter().enumerate().skip(l + 1) {
            controlled_phase(TAU / (1u64 << (k - l + 1)) as f64, c, q, &mut out);
        }
    }
    out
}

/// Phase estimation onto `register` (most significant first): afterwards an
/// eigenvector with phase n/2^m leaves the register holding n mod 2^m.
fn phase_estimation(eig: &EigenDecomp, t0: f64, register: &[usize], target: usize) -> Vec<Gate> {
    let mut out: Vec<Gate> = register.iter().map(|&q| Gate::h(q)).collect();
    for (j, &q) in register.iter().enumerate() {
        out.extend(controlled_evolution(
            eig,
            t0 * (1u64 << j) as f64,
            q,
            target,
        ));
    }
    out.extend(inverse_gates(&qft_noswap(register)));
    out
}

/// Phase-estimation solver on 1 + m + 1 qubits: state (0), register
/// (1..=m, most significant first) and ancilla (m + 1).
///
/// Only spectra whose eigenphases are exact in m bits are supported.
pub fn build_general_circuit(
    system: &LinearSystem,
    config: &SolverConfig,
) -> Result<Circuit, HhlError> {
    let eig = super::eigendecompose(system.a())?;
    if !eig.is_positive_definite() {
        return Err(HhlError::NotPositiveDefinite);
    }
    let m = config.eigen_register_bits;
    let n = m + 2;
    if m == 0 || n > MAX_QUBITS {
        return Err(HhlError::QubitBudget(n));
    }
    let t0 = match config.t0 {
        Some(t0) => t0,
        None => choose_t0(&eig, m)?,
    };
    let k1 = register_value(eig.lambda1, t0, m)?;
    let k2 = register_value(eig.lambda2, t0, m)?;
    if k1 == k2 && !eig.is_degenerate() {
        return Err(HhlError::InexactT0(t0));
    }
    let cc = config.resolve_c(&eig)?;
    let mut angles = vec![0.0; 1 << m];
    angles[k1] = rotation_angle_exact(eig.lambda1, cc)?;
    angles[k2] = rotation_angle_exact(eig.lambda2, cc)?;

    let register: Vec<usize> = (1..=m).collect();
    let ancilla = m + 1;
    let mut c = Circuit::new(n);
    c.set_role(STATE_QUBIT, Role::State)?;
    for &q in &register {
        c.set_role(q, Role::Eigen)?;
    }
    c.set_role(ancilla, Role::Ancilla)?;
    c.extend(prepare_b(system.b_unit()?, STATE_QUBIT)?)?;
    let qpe = phase_estimation(&eig, t0, &register, STATE_QUBIT);
    c.extend(qpe.iter().copied())?;
    // Bit i of the register value sits on register[m − 1 − i].
    let controls: Vec<usize> = register.iter().rev().copied().collect();
    c.extend(uniformly_controlled_ry(&controls, ancilla, &angles)?)?;
    c.extend(inverse_gates(&qpe))?;
    c.add_measure(STATE_QUBIT)?;
    c.add_measure(ancilla)?;
    Ok(c)
}
