use std::fmt::Write as _;

use num_complex::Complex64;

use super::{
    classical_solve, compile_solver, mat_vec, HhlError, LinearSystem, SolverCircuit, SolverConfig,
};
use crate::fmt::sig;
use crate::qsim::{
    analytic_expectations, fidelity_from_expectations, postselect, run_statevector,
    PauliExpectations, StateVector,
};

/// What the client learned about the post-selected state qubit.
#[derive(Debug, Clone, PartialEq)]
pub enum Readout {
    /// The full post-selected state.
    Amplitudes { state: StateVector, qubit: usize },
    /// Pauli expectations reconstructed from Z/X/Y counts.
    Tomography(PauliExpectations),
}

/// Solver output. `masked_solution` is what the circuit computed for the
/// system it was given; `solution` equals it unless a caller (the encrypted
/// solve) replaces it with an unmasked value.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport {
    pub normalized_solution: [f64; 2],
    pub success_probability: f64,
    pub scale: f64,
    pub masked_solution: [f64; 2],
    pub solution: [f64; 2],
    pub expectations: PauliExpectations,
    pub fidelity_vs_ideal: f64,
    /// ‖solution − reference‖ / ‖reference‖ against the classical solution.
    pub relative_error: f64,
}

impl SolutionReport {
    /// Flat `key=value` record, one pair per line, 12 significant digits.
    ///
    /// Keys: `normalized_x1`, `normalized_x2`, `success_probability`, `scale`,
    /// `masked_x1`, `masked_x2`, `solution_x1`, `solution_x2`, `exp_z`,
    /// `exp_x`, `exp_y`, `sigma_z`, `sigma_x`, `sigma_y`, `shots_per_basis`,
    /// `fidelity_vs_ideal`, `relative_error`.
    pub fn to_record(&self) -> String {
        let e = &self.expectations;
        let fields = [
            ("normalized_x1", self.normalized_solution[0]),
            ("normalized_x2", self.normalized_solution[1]),
            ("success_probability", self.success_probability),
            ("scale", self.scale),
            ("masked_x1", self.masked_solution[0]),
            ("masked_x2", self.masked_solution[1]),
            ("solution_x1", self.solution[0]),
            ("solution_x2", self.solution[1]),
            ("exp_z", e.z),
            ("exp_x", e.x),
            ("exp_y", e.y),
            ("sigma_z", e.sigma_z),
            ("sigma_x", e.sigma_x),
            ("sigma_y", e.sigma_y),
        ];
        let mut out = String::new();
        for (key, value) in fields {
            writeln!(out, "{key}={}", sig(value, 12)).unwrap();
        }
        writeln!(out, "shots_per_basis={}", e.shots_per_basis).unwrap();
        writeln!(out, "fidelity_vs_ideal={}", sig(self.fidelity_vs_ideal, 12)).unwrap();
        writeln!(out, "relative_error={}", sig(self.relative_error, 12)).unwrap();
        out
    }
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Real amplitudes of one qubit, global phase removed by making the larger
/// amplitude real and positive.
fn real_amplitudes(state: &StateVector, qubit: usize) -> Result<[f64; 2], HhlError> {
    let (pair, _) = state.qubit_amplitudes(qubit)?;
    let pivot = if pair[0].norm() >= pair[1].norm() {
        pair[0]
    } else {
        pair[1]
    };
    let phase: Complex64 = pivot.conj() / pivot.norm();
    Ok(unit(pair.map(|z| (z * phase).re)))
}

/// Turns a post-selected readout into a rescaled solution of `system`.
///
/// The state is known only up to a global sign; the sign is chosen so that
/// ⟨A·x̂, b⟩ > 0, which holds for x̂ ∝ A⁻¹b. Tomographic readouts place x̂ at
/// half the Bloch angle atan2(⟨X⟩, ⟨Z⟩). The scale is ‖b‖·√P / C.
pub fn extract_solution(
    readout: &Readout,
    success_probability: f64,
    c: f64,
    system: &LinearSystem,
) -> Result<SolutionReport, HhlError> {
    if success_probability.is_nan() || success_probability <= 0.0 {
        return Err(HhlError::ZeroSuccess(success_probability));
    }
    if c.is_nan() || c <= 0.0 {
        return Err(HhlError::BadConstant(c));
    }
    let (mut x, expectations) = match readout {
        Readout::Amplitudes { state, qubit } => (
            real_amplitudes(state, *qubit)?,
            analytic_expectations(state, *qubit)?,
        ),
        Readout::Tomography(e) => {
            let half = 0.5 * e.x.atan2(e.z);
            ([half.cos(), half.sin()], *e)
        }
    };
    let ax = mat_vec(system.a(), x);
    let b = system.b();
    if ax[0] * b[0] + ax[1] * b[1] < 0.0 {
        x = [-x[0], -x[1]];
    }
    let scale = system.b_norm() * success_probability.sqrt() / c;
    let masked = [scale * x[0], scale * x[1]];

    let reference = classical_solve(system);
    let ideal = StateVector::from_real(&unit(reference))?;
    let fidelity_vs_ideal = fidelity_from_expectations(&expectations, &ideal)?;
    let relative_error =
        norm([masked[0] - reference[0], masked[1] - reference[1]]) / norm(reference);
    Ok(SolutionReport {
        normalized_solution: x,
        success_probability,
        scale,
        masked_solution: masked,
        solution: masked,
        expectations,
        fidelity_vs_ideal,
        relative_error,
    })
}

/// Simulates the compiled circuit from |0…0⟩ and post-selects the ancilla on 1.
pub fn run_analytic(sc: &SolverCircuit) -> Result<(StateVector, f64), HhlError> {
    let n = sc.circuit.n_qubits();
    let out = run_statevector(&sc.circuit, StateVector::zero(n)?)?;
    Ok(postselect(&out, sc.ancilla(), 1)?)
}

/// Compile, simulate exactly, and extract, all in process.
pub fn solve_analytic(
    system: &LinearSystem,
    config: &SolverConfig,
) -> Result<SolutionReport, HhlError> {
    let sc = compile_solver(system, config)?;
    let (state, p) = run_analytic(&sc)?;
    let readout = Readout::Amplitudes {
        state,
        qubit: sc.state_qubit(),
    };
    extract_solution(&readout, p, sc.c_effective, system)
}
