//! Shared inputs for the criterion benches.

use qhe_core::circ::{emit_text, Circuit};
use qhe_core::hhl::{build_general_circuit, compile_solver, LinearSystem, SolverConfig};
use qhe_core::qserve::{BasisSpec, Job, Postselect, WireBasis};

const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// The masked system A = [[0.7, 0.3], [0.3, 0.7]], b′ = (1, 1)/√2.
pub fn masked_system() -> LinearSystem {
    LinearSystem::new([[0.7, 0.3], [0.3, 0.7]], [S, S]).expect("valid system")
}

/// Phase-estimation circuit with an `m`-bit register.
pub fn general_circuit(m: usize) -> Circuit {
    let config = SolverConfig {
        eigen_register_bits: m,
        ..SolverConfig::exact()
    };
    build_general_circuit(&masked_system(), &config).expect("fixture compiles")
}

/// Sampled tomography job for the compiled replica circuit.
pub fn replica_job(shots: u64) -> Job {
    let compiled =
        compile_solver(&masked_system(), &SolverConfig::replica()).expect("fixture compiles");
    let mut job = Job::sampled("bench", emit_text(&compiled.circuit), shots, 1);
    job.postselect = Some(Postselect {
        qubit: compiled.ancilla(),
        outcome: 1,
    });
    job.bases = [WireBasis::Z, WireBasis::X, WireBasis::Y]
        .into_iter()
        .map(|basis| BasisSpec {
            basis,
            qubit: compiled.state_qubit(),
        })
        .collect();
    job
}
