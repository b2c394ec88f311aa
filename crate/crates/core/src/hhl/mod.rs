//! Two-by-two quantum linear solver.
//!
//! Qubit layout of the optimized circuit: the state qubit carries |b⟩ and,
//! after post-selection, |x⟩; the eigenvalue qubit holds the eigenbasis index;
//! the ancilla receives the C/λ rotation and is post-selected on 1. The
//! general circuit replaces the eigenvalue qubit with an m-qubit phase
//! estimation register.

mod build;
mod extract;

use thiserror::Error;

use crate::circ::{CircError, Topology};
use crate::qsim::SimError;
use crate::synth::SynthError;

pub use build::{
    build_general_circuit, build_optimized_circuit, choose_t0, compile_solver, eigenbasis_gates,
    prepare_b, register_value, SolverCircuit, ANCILLA_QUBIT, EIGEN_QUBIT, STATE_QUBIT,
};
pub use extract::{extract_solution, run_analytic, solve_analytic, Readout, SolutionReport};

pub type Matrix2 = [[f64; 2]; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HhlError {
    #[error("matrix is not symmetric (off-diagonal gap {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is singular (|det| = {0:e})")]
    Singular(f64),
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("vector norm {0} is not 1")]
    NotUnit(f64),
    #[error("right-hand side is the zero vector")]
    ZeroVector,
    #[error("rotation constant {c} exceeds |λ| = {lambda}")]
    AngleDomain { c: f64, lambda: f64 },
    #[error("rotation constant must be positive, got {0}")]
    BadConstant(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("no evolution time makes both eigenphases exact in {0} bits")]
    NoExactT0(usize),
    #[error("t0 = {0} does not make both eigenphases exact")]
    InexactT0(f64),
    #[error("general circuit needs {0} qubits, limit is 10")]
    QubitBudget(usize),
    #[error("post-selection probability {0:e} is zero")]
    ZeroSuccess(f64),
    #[error(transparent)]
    Circuit(#[from] CircError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

/// A x = b with a real symmetric, nonsingular A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSystem {
    a: Matrix2,
    b: [f64; 2],
}

impl LinearSystem {
    pub fn new(a: Matrix2, b: [f64; 2]) -> Result<LinearSystem, HhlError> {
        if a.iter().flatten().chain(&b).any(|v| !v.is_finite()) {
            return Err(HhlError::NonFinite);
        }
        check_symmetric(&a)?;
        let det = det(&a);
        if det.abs() <= 1e-9 {
            return Err(HhlError::Singular(det.abs()));
        }
        Ok(LinearSystem { a, b })
    }

    pub fn a(&self) -> &Matrix2 {
        &self.a
    }

    pub fn b(&self) -> [f64; 2] {
        self.b
    }

    pub fn b_norm(&self) -> f64 {
        self.b[0].hypot(self.b[1])
    }

    /// b / ‖b‖.
    pub fn b_unit(&self) -> Result<[f64; 2], HhlError> {
        let n = self.b_norm();
        if n == 0.0 {
            return Err(HhlError::ZeroVector);
        }
        Ok([self.b[0] / n, self.b[1] / n])
    }

    /// Same matrix, new right-hand side.
    pub fn with_b(&self, b: [f64; 2]) -> Result<LinearSystem, HhlError> {
        LinearSystem::new(self.a, b)
    }
}

fn check_symmetric(a: &Matrix2) -> Result<(), HhlError> {
    let gap = (a[0][1] - a[1][0]).abs();
    if gap > 1e-12 {
        Err(HhlError::NotSymmetric(gap))
    } else {
        Ok(())
    }
}

fn det(a: &Matrix2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub(crate) fn mat_vec(a: &Matrix2, v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

/// A⁻¹b by the closed-form 2x2 inverse.
pub fn classical_solve(system: &LinearSystem) -> [f64; 2] {
    let a = &system.a;
    let b = system.b;
    let d = det(a);
    [
        (a[1][1] * b[0] - a[0][1] * b[1]) / d,
        (a[0][0] * b[1] - a[1][0] * b[0]) / d,
    ]
}

/// A = rᵀ·diag(λ1, λ2)·r with the eigenvectors as the rows of `r`.
///
/// Positive-definite spectra are ordered λ1 ≥ λ2; otherwise by descending
/// magnitude. Each eigenvector's first non-negligible component is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenDecomp {
    pub lambda1: f64,
    pub lambda2: f64,
    pub r: Matrix2,
}

impl EigenDecomp {
    pub fn lambdas(&self) -> [f64; 2] {
        [self.lambda1, self.lambda2]
    }

    pub fn eigenvector(&self, i: usize) -> [f64; 2] {
        self.r[i]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.lambda1 > 0.0 && self.lambda2 > 0.0
    }

    /// Smallest eigenvalue magnitude.
    pub fn lambda_min(&self) -> f64 {
        self.lambda1.abs().min(self.lambda2.abs())
    }

    pub fn is_degenerate(&self) -> bool {
        (self.lambda1 - self.lambda2).abs() <= 1e-12 * self.lambda1.abs().max(1.0)
    }

    /// Eigenbasis coefficients β = r·b.
    pub fn coefficients(&self, b: [f64; 2]) -> [f64; 2] {
        mat_vec(&self.r, b)
    }

    pub fn reconstruct(&self) -> Matrix2 {
        let r = &self.r;
        let l = [self.lambda1, self.lambda2];
        let mut a = [[0.0; 2]; 2];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..2).map(|k| r[k][i] * l[k] * r[k][j]).sum();
            }
        }
        a
    }
}

pub fn eigendecompose(a: &Matrix2) -> Result<EigenDecomp, HhlError> {
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(HhlError::NonFinite);
    }
    check_symmetric(a)?;
    let (p, s) = (a[0][0], a[1][1]);
    let q = 0.5 * (a[0][1] + a[1][0]);
    let mean = 0.5 * (p + s);
    let d = (0.5 * (p - s)).hypot(q);
    if d == 0.0 {
        return Ok(EigenDecomp {
            lambda1: p,
            lambda2: p,
            r: [[1.0, 0.0], [0.0, 1.0]],
        });
    }
    let (hi, lo) = (mean + d, mean - d);
    // The larger of the two textbook forms avoids cancellation.
    let v = if p >= s { [hi - s, q] } else { [q, hi - p] };
    let n = v[0].hypot(v[1]);
    let v_hi = [v[0] / n, v[1] / n];
    let v_lo = [-v_hi[1], v_hi[0]];

    let hi_first = if hi > 0.0 && lo > 0.0 {
        true
    } else if hi.abs() != lo.abs() {
        hi.abs() > lo.abs()
    } else {
        true
    };
    let (l1, u1, l2, u2) = if hi_first {
        (hi, v_hi, lo, v_lo)
    } else {
        (lo, v_lo, hi, v_hi)
    };
    Ok(EigenDecomp {
        lambda1: l1,
        lambda2: l2,
        r: [positive_first(u1), positive_first(u2)],
    })
}

fn positive_first(v: [f64; 2]) -> [f64; 2] {
    let lead = if v[0].abs() > 1e-12 { v[0] } else { v[1] };
    if lead < 0.0 {
        [-v[0], -v[1]]
    } else {
        v
    }
}

/// θ with R_y(θ)|0⟩ = √(1 − c²/λ²)|0⟩ + (c/λ)|1⟩, i.e. 2·asin(c/λ).
///
/// Negative λ gives a negative angle; `c` must satisfy 0 < c ≤ |λ|.
pub fn rotation_angle_exact(lambda: f64, c: f64) -> Result<f64, HhlError> {
    if !(lambda.is_finite() && c.is_finite()) {
        return Err(HhlError::NonFinite);
    }
    if c <= 0.0 {
        return Err(HhlError::BadConstant(c));
    }
    if c > lambda.abs() * (1.0 + 1e-12) {
        return Err(HhlError::AngleDomain { c, lambda });
    }
    Ok(2.0 * (c / lambda).clamp(-1.0, 1.0).asin())
}

/// The single rotation angle of the replica circuit: `override_angle` if
/// given, else −2·acos(λ_small/λ_large) with the ratio clamped into [−1, 1].
pub fn rotation_angle_replica(eig: &EigenDecomp, override_angle: Option<f64>) -> f64 {
    if let Some(theta) = override_angle {
        return theta;
    }
    let ratio = (eig.lambda2 / eig.lambda1).clamp(-1.0, 1.0);
    -2.0 * ratio.acos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One controlled rotation per eigenvalue branch; output ∝ A⁻¹b.
    Exact,
    /// A single controlled rotation on the dominant eigenvalue branch.
    Replica,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Replica => "replica",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Analytic,
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: Mode,
    /// C of the eigenvalue inversion; `None` means the smallest |λ|.
    pub c_constant: Option<f64>,
    /// Replica rotation angle in radians.
    pub theta_override: Option<f64>,
    /// Phase-estimation register width of the general circuit.
    pub eigen_register_bits: usize,
    /// Evolution time of the general circuit; `None` asks [`choose_t0`].
    pub t0: Option<f64>,
    pub execution: Execution,
    /// Replica mode only: replace every RY with its best Clifford+T word
    /// under this T budget.
    pub t_budget: Option<usize>,
    pub topology: Topology,
}

impl SolverConfig {
    pub fn exact() -> SolverConfig {
        SolverConfig {
            mode: Mode::Exact,
            c_constant: None,
            theta_override: None,
            eigen_register_bits: 3,
            t0: None,
            execution: Execution::Analytic,
            t_budget: None,
            topology: Topology::Star {
                center: EIGEN_QUBIT,
            },
        }
    }

    pub fn replica() -> SolverConfig {
        SolverConfig {
            mode: Mode::Replica,
            t_budget: Some(7),
            ..SolverConfig::exact()
        }
    }

    /// The configured C, checked against the spectrum.
    pub fn resolve_c(&self, eig: &EigenDecomp) -> Result<f64, HhlError> {
        let c = self.c_constant.unwrap_or_else(|| eig.lambda_min());
        if !c.is_finite() {
            return Err(HhlError::NonFinite);
        }
        if c <= 0.0 {
            return Err(HhlError::BadConstant(c));
        }
        if c > eig.lambda_min() * (1.0 + 1e-12) {
            return Err(HhlError::AngleDomain {
                c,
                lambda: eig.lambda_min(),
            });
        }
        Ok(c)
    }
}
