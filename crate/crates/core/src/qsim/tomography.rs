use log::debug;
use num_complex::Complex64;

use super::{Counts, SimError, StateVector};

/// Published hardware fidelity for the masked system with b′ = (1, 1)/√2,
/// as `(value, one standard deviation)`. Device noise is not modelled, so
/// this is a reference value only.
pub const HARDWARE_FIDELITY_UNIFORM_B: (f64, f64) = (0.992, 0.001);
/// Same, for b′ = (1, −1)/√2.
pub const HARDWARE_FIDELITY_ALTERNATING_B: (f64, f64) = (0.920, 0.007);

/// Single-qubit Pauli expectation values with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliExpectations {
    pub z: f64,
    pub x: f64,
    pub y: f64,
    pub sigma_z: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// Zero for analytic expectations.
    pub shots_per_basis: u64,
}

impl PauliExpectations {
    pub fn exact(z: f64, x: f64, y: f64) -> PauliExpectations {
        PauliExpectations {
            z,
            x,
            y,
            sigma_z: 0.0,
            sigma_x: 0.0,
            sigma_y: 0.0,
            shots_per_basis: 0,
        }
    }

    pub fn bloch_norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn max_sigma(&self) -> f64 {
        self.sigma_x.max(self.sigma_y).max(self.sigma_z)
    }
}

fn expectation(counts: &Counts, qubit: usize) -> Result<(f64, f64), SimError> {
    if counts.shots() == 0 {
        return Err(SimError::EmptyCounts);
    }
    let (plus, minus) = counts.marginal(qubit)?;
    let n = counts.shots() as f64;
    let e = (plus as f64 - minus as f64) / n;
    Ok((e, ((1.0 - e * e).max(0.0) / n).sqrt()))
}

/// Expectations from Z-, X- and Y-basis count tables (outcome 0 is the +1
/// eigenvalue), with binomial standard errors sqrt((1 − e²)/N).
pub fn pauli_expectations(
    zc: &Counts,
    xc: &Counts,
    yc: &Counts,
    qubit: usize,
) -> Result<PauliExpectations, SimError> {
    let (z, sigma_z) = expectation(zc, qubit)?;
    let (x, sigma_x) = expectation(xc, qubit)?;
    let (y, sigma_y) = expectation(yc, qubit)?;
    Ok(PauliExpectations {
        z,
        x,
        y,
        sigma_z,
        sigma_x,
        sigma_y,
        shots_per_basis: zc.shots().min(xc.shots()).min(yc.shots()),
    })
}

/// Exact expectations of `qubit`'s reduced state.
pub fn analytic_expectations(
    state: &StateVector,
    qubit: usize,
) -> Result<PauliExpectations, SimError> {
    if qubit >= state.n_qubits() {
        return Err(SimError::IndexOutOfRange {
            index: qubit,
            n_qubits: state.n_qubits(),
        });
    }
    let mask = state.mask(qubit);
    let amps = state.amplitudes();
    let (mut p0, mut p1) = (0.0, 0.0);
    let mut coherence = Complex64::new(0.0, 0.0);
    for i in (0..amps.len()).filter(|i| i & mask == 0) {
        let (a0, a1) = (amps[i], amps[i | mask]);
        p0 += a0.norm_sqr();
        p1 += a1.norm_sqr();
        coherence += a0 * a1.conj();
    }
    Ok(PauliExpectations::exact(
        p0 - p1,
        2.0 * coherence.re,
        -2.0 * coherence.im,
    ))
}

/// Bloch coordinates `(x, y, z)` of a one-qubit pure state.
pub fn bloch_vector(state: &StateVector) -> Result<[f64; 3], SimError> {
    let e = analytic_expectations(state, 0)?;
    Ok([e.x, e.y, e.z])
}

/// ⟨ideal|ρ|ideal⟩ for ρ = (I + xX + yY + zZ)/2.
///
/// A Bloch vector longer than 1 by less than three standard errors is
/// rescaled onto the sphere (and logged); anything longer is rejected.
pub fn fidelity_from_expectations(
    e: &PauliExpectations,
    ideal: &StateVector,
) -> Result<f64, SimError> {
    if ideal.n_qubits() != 1 {
        return Err(SimError::QubitMismatch {
            circuit: 1,
            state: ideal.n_qubits(),
        });
    }
    let norm = e.bloch_norm();
    let tolerance = 1.0 + 3.0 * e.max_sigma() + 1e-9;
    if norm > tolerance {
        return Err(SimError::InconsistentTomography { norm, tolerance });
    }
    let scale = if norm > 1.0 {
        debug!("clamping tomographic Bloch vector of norm {norm:.6} onto the sphere");
        1.0 / norm
    } else {
        1.0
    };
    let [bx, by, bz] = bloch_vector(ideal)?;
    Ok(0.5 * (1.0 + scale * (e.x * bx + e.y * by + e.z * bz)))
}
