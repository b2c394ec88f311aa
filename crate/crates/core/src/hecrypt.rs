//! Client side of the masking protocol.
//!
//! The client picks a binary key a, substitutes x = y + a and sends the
//! masked system A·y = b′ with b′ = b − A·a. The server solves for y; the
//! client recovers x = y + a. A travels in the clear.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circ::{emit_text, Basis};
use crate::hhl::{
    classical_solve, compile_solver, extract_solution, mat_vec, Execution, HhlError, LinearSystem,
    Matrix2, Readout, SolutionReport, SolverConfig,
};
use crate::qserve::{
    submit_via, BasisSpec, Job, JobResult, Postselect, QserveError, Transport, WireBasis,
};
use crate::qsim::{pauli_expectations, Counts, SimError, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CryptError {
    #[error("key length must be at least 1")]
    EmptyKey,
    #[error("key component {0} is not 0 or 1")]
    NotBinary(u8),
    #[error("expected dimension {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("masked right-hand side is zero; draw another key")]
    ZeroMaskedVector,
    #[error("server reply is missing `{0}`")]
    IncompleteReply(&'static str),
    #[error(transparent)]
    Hhl(#[from] HhlError),
    #[error(transparent)]
    Service(#[from] QserveError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// The private binary mask.
#[derive(Clone, PartialEq, Eq)]
pub struct MaskKey {
    bits: Vec<u8>,
}

impl MaskKey {
    pub fn new(bits: Vec<u8>) -> Result<MaskKey, CryptError> {
        if bits.is_empty() {
            return Err(CryptError::EmptyKey);
        }
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(CryptError::NotBinary(b));
        }
        Ok(MaskKey { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn as_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| f64::from(b)).collect()
    }

    fn pair(&self) -> Result<[f64; 2], CryptError> {
        check_len(self.len(), 2)?;
        Ok([f64::from(self.bits[0]), f64::from(self.bits[1])])
    }
}

// Keeps keys out of debug logs.
impl std::fmt::Debug for MaskKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MaskKey(<{} bits>)", self.bits.len())
    }
}

fn check_len(found: usize, expected: usize) -> Result<(), CryptError> {
    if found == expected {
        Ok(())
    } else {
        Err(CryptError::DimensionMismatch { expected, found })
    }
}

/// `n` uniform bits from ChaCha8 seeded with `seed`.
pub fn keygen(n: usize, seed: u64) -> Result<MaskKey, CryptError> {
    if n == 0 {
        return Err(CryptError::EmptyKey);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MaskKey::new((0..n).map(|_| rng.gen_range(0..=1u8)).collect())
}

/// What the server is allowed to see.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskedSystem {
    pub a_matrix: Matrix2,
    pub b_prime: [f64; 2],
    pub b_prime_norm: f64,
}

impl MaskedSystem {
    pub fn system(&self) -> Result<LinearSystem, CryptError> {
        Ok(LinearSystem::new(self.a_matrix, self.b_prime)?)
    }
}

/// b′ = b − A·a, with A passed through unchanged.
pub fn encrypt(system: &LinearSystem, key: &MaskKey) -> Result<MaskedSystem, CryptError> {
    let a = key.pair()?;
    let shift = mat_vec(system.a(), a);
    let b = system.b();
    let b_prime = [b[0] - shift[0], b[1] - shift[1]];
    let b_prime_norm = b_prime[0].hypot(b_prime[1]);
    if b_prime_norm <= 1e-12 * b[0].hypot(b[1]).max(1.0) {
        return Err(CryptError::ZeroMaskedVector);
    }
    Ok(MaskedSystem {
        a_matrix: *system.a(),
        b_prime,
        b_prime_norm,
    })
}

/// x = r + a, componentwise.
pub fn decrypt(result: &[f64], key: &MaskKey) -> Result<Vec<f64>, CryptError> {
    check_len(result.len(), key.len())?;
    Ok(result
        .iter()
        .zip(key.as_f64())
        .map(|(r, a)| r + a)
        .collect())
}

/// Masks `system`, delegates the compiled circuit through `transport`, and
/// unmasks the reply. The job carries the circuit text, execution parameters,
/// post-selection, measurement bases and ‖b′‖; the key stays here.
///
/// The report's `solution` is the decrypted x and `relative_error` compares
/// it with the plaintext oracle; the other fields describe the masked solve.
pub fn solve_encrypted(
    system: &LinearSystem,
    key: &MaskKey,
    transport: &mut dyn Transport,
    config: &SolverConfig,
    noise_p: Option<f64>,
) -> Result<SolutionReport, CryptError> {
    let masked = encrypt(system, key)?;
    let masked_system = masked.system()?;
    let compiled = compile_solver(&masked_system, config)?;
    let circuit = &compiled.circuit;
    let text = emit_text(circuit);
    let state_qubit = compiled.state_qubit();
    let mut job = match config.execution {
        Execution::Analytic => Job::analytic("", text),
        Execution::Sampled { shots, seed } => Job::sampled("", text, shots, seed),
    };
    job.id = match config.execution {
        Execution::Analytic => "solve-analytic".to_string(),
        Execution::Sampled { seed, .. } => format!("solve-{seed}"),
    };
    job.postselect = Some(Postselect {
        qubit: compiled.ancilla(),
        outcome: 1,
    });
    job.bases = Basis::ALL
        .iter()
        .map(|&b| BasisSpec {
            basis: WireBasis::from(b),
            qubit: state_qubit,
        })
        .collect();
    job.noise_p = noise_p;
    job.b_prime_norm = Some(masked.b_prime_norm);

    let reply = submit_via(transport, &job)?;
    let (readout, p) = readout_from_reply(&reply, circuit.n_qubits(), state_qubit)?;
    let mut report = extract_solution(&readout, p, compiled.c_effective, &masked_system)?;
    let x = decrypt(&report.masked_solution, key)?;
    report.solution = [x[0], x[1]];
    let reference = classical_solve(system);
    report.relative_error =
        ((x[0] - reference[0]).hypot(x[1] - reference[1])) / reference[0].hypot(reference[1]);
    Ok(report)
}

/// Post-selected readout and success probability from a server reply.
///
/// Sampled replies must hold Z, X and Y results for `qubit`; the success
/// probability is pooled over all bases as kept/raw.
pub fn readout_from_reply(
    reply: &JobResult,
    n_qubits: usize,
    qubit: usize,
) -> Result<(Readout, f64), CryptError> {
    if let Some(amps) = &reply.amplitudes {
        let p = reply
            .success_probability
            .ok_or(CryptError::IncompleteReply("success_probability"))?;
        let state = StateVector::from_amplitudes(
            amps.iter()
                .map(|&[re, im]| num_complex::Complex64::new(re, im))
                .collect(),
        )?;
        check_len(state.n_qubits(), n_qubits)?;
        return Ok((Readout::Amplitudes { state, qubit }, p));
    }
    let results = reply
        .results
        .as_ref()
        .ok_or(CryptError::IncompleteReply("results"))?;
    let mut by_basis: BTreeMap<&str, Counts> = BTreeMap::new();
    let (mut kept, mut raw) = (0u64, 0u64);
    for r in results.iter().filter(|r| r.qubit == qubit) {
        kept += r.kept_shots;
        raw += r.raw_shots;
        let name = Basis::from(r.basis).name();
        by_basis.insert(name, Counts::new(n_qubits, r.counts.clone())?);
    }
    let get = |name: &'static str| by_basis.get(name).ok_or(CryptError::IncompleteReply(name));
    let e = pauli_expectations(get("Z")?, get("X")?, get("Y")?, qubit)?;
    if raw == 0 {
        return Err(CryptError::IncompleteReply("raw_shots"));
    }
    Ok((Readout::Tomography(e), kept as f64 / raw as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qserve::InProcess;
    use proptest::{prop_assert, prop_assert_eq, proptest};
    use std::f64::consts::FRAC_1_SQRT_2 as S;

    fn small() -> LinearSystem {
        LinearSystem::new([[0.7, 0.3], [0.3, 0.7]], [S + 0.7, S + 0.3]).unwrap()
    }

    fn large() -> LinearSystem {
        LinearSystem::new([[1.75, 0.75], [0.75, 1.75]], [S + 1.75, -S + 0.75]).unwrap()
    }

    fn fixture_key() -> MaskKey {
        MaskKey::new(vec![1, 0]).unwrap()
    }

    #[test]
    fn keygen_is_seeded_and_binary() {
        assert_eq!(keygen(2, 5).unwrap(), keygen(2, 5).unwrap());
        for seed in 0..50 {
            assert!(keygen(8, seed).unwrap().bits().iter().all(|&b| b <= 1));
        }
        assert_eq!(keygen(0, 1), Err(CryptError::EmptyKey));
        assert_eq!(MaskKey::new(vec![1, 2]), Err(CryptError::NotBinary(2)));
        assert!(!format!("{:?}", fixture_key()).contains('1'));
    }

    #[test]
    fn fixtures_mask_to_unit_vectors() {
        let m = encrypt(&small(), &fixture_key()).unwrap();
        assert!((m.b_prime[0] - S).abs() < 1e-12 && (m.b_prime[1] - S).abs() < 1e-12);
        assert_eq!(m.a_matrix, *small().a());
        let m = encrypt(&large(), &fixture_key()).unwrap();
        assert!((m.b_prime[0] - S).abs() < 1e-12 && (m.b_prime[1] + S).abs() < 1e-12);
        assert!((m.b_prime_norm - 1.0).abs() < 1e-12);
        let m = encrypt(&small(), &MaskKey::new(vec![0, 0]).unwrap()).unwrap();
        assert_eq!(m.b_prime, small().b());
    }

    #[test]
    fn zero_masked_vector_is_refused() {
        let sys = LinearSystem::new([[0.7, 0.3], [0.3, 0.7]], [0.7, 0.3]).unwrap();
        assert_eq!(
            encrypt(&sys, &fixture_key()),
            Err(CryptError::ZeroMaskedVector)
        );
    }

    #[test]
    fn decrypt_examples() {
        let x = decrypt(&[S, S], &fixture_key()).unwrap();
        assert!((x[0] - (1.0 + S)).abs() < 1e-15 && x[1] == S);
        assert_eq!(
            decrypt(&[0.3, -2.0], &MaskKey::new(vec![0, 0]).unwrap()).unwrap(),
            vec![0.3, -2.0]
        );
        assert!(matches!(
            decrypt(&[1.0], &fixture_key()),
            Err(CryptError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn analytic_encrypted_fixtures() {
        for (sys, want) in [(small(), [1.0 + S, S]), (large(), [1.0 + S, -S])] {
            let r = solve_encrypted(
                &sys,
                &fixture_key(),
                &mut InProcess,
                &SolverConfig::exact(),
                None,
            )
            .unwrap();
            assert!((r.solution[0] - want[0]).abs() < 1e-6);
            assert!((r.solution[1] - want[1]).abs() < 1e-6);
            assert!(r.relative_error < 1e-6);
        }
    }

    struct Capture(Vec<Vec<u8>>);

    impl Transport for Capture {
        fn round_trip(&mut self, request: &[u8]) -> Result<Vec<u8>, QserveError> {
            self.0.push(request.to_vec());
            InProcess.round_trip(request)
        }
    }

    fn random_system(rng: &mut ChaCha8Rng) -> LinearSystem {
        let p = rng.gen_range(0.5..3.0);
        let s = rng.gen_range(0.5..3.0);
        let q = rng.gen_range(-0.45..0.45);
        let b = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        LinearSystem::new([[p, q], [q, s]], b).unwrap()
    }

    #[test]
    fn homomorphism_over_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut checked = 0;
        while checked < 1000 {
            let sys = random_system(&mut rng);
            let key = keygen(2, rng.gen()).unwrap();
            let Ok(m) = encrypt(&sys, &key) else { continue };
            let want = classical_solve(&sys);
            let x = decrypt(&classical_solve(&m.system().unwrap()), &key).unwrap();
            assert!((x[0] - want[0]).abs() < 1e-9 && (x[1] - want[1]).abs() < 1e-9);
            let r =
                solve_encrypted(&sys, &key, &mut InProcess, &SolverConfig::exact(), None).unwrap();
            assert!(
                (r.solution[0] - want[0]).abs() < 1e-6 && (r.solution[1] - want[1]).abs() < 1e-6,
                "{:?} vs {want:?}",
                r.solution
            );
            checked += 1;
        }
    }

    #[test]
    fn key_and_plaintext_stay_on_the_client() {
        let sys = small();
        let mut cap = Capture(vec![]);
        let config = SolverConfig {
            execution: Execution::Sampled {
                shots: 256,
                seed: 9,
            },
            ..SolverConfig::replica()
        };
        solve_encrypted(&sys, &fixture_key(), &mut cap, &config, None).unwrap();
        assert_eq!(cap.0.len(), 1);
        let sent = &cap.0[0];
        let value: serde_json::Value = serde_json::from_slice(sent).unwrap();
        let allowed = [
            "id",
            "circuit",
            "mode",
            "shots",
            "seed",
            "postselect",
            "bases",
            "noise_p",
            "b_prime_norm",
        ];
        for k in value.as_object().unwrap().keys() {
            assert!(allowed.contains(&k.as_str()), "unexpected field {k}");
        }
        let text = String::from_utf8_lossy(sent);
        for b in sys.b() {
            assert!(!text.contains(&format!("{b}")[..8]), "plaintext b leaked");
        }
    }

    #[test]
    fn sampled_replica_small_fixture_within_two_percent() {
        let config = SolverConfig {
            execution: Execution::Sampled {
                shots: 8192,
                seed: 7,
            },
            ..SolverConfig::replica()
        };
        let r = solve_encrypted(&small(), &fixture_key(), &mut InProcess, &config, None).unwrap();
        assert!(r.relative_error < 0.02, "{}", r.relative_error);
    }

    proptest! {
        #[test]
        fn unmasking_inverts_masking(r0 in -5.0f64..5.0, r1 in -5.0f64..5.0, a0: bool, a1: bool) {
            let key = MaskKey::new(vec![u8::from(a0), u8::from(a1)]).unwrap();
            let shifted = [r0 - f64::from(u8::from(a0)), r1 - f64::from(u8::from(a1))];
            let back = decrypt(&shifted, &key).unwrap();
            prop_assert!((back[0] - r0).abs() < 1e-12 && (back[1] - r1).abs() < 1e-12);
        }

        #[test]
        fn classical_homomorphism(p in 0.3f64..3.0, q in -0.25f64..0.25, s in 0.3f64..3.0,
                                  b0 in -3.0f64..3.0, b1 in -3.0f64..3.0, seed: u64) {
            let sys = LinearSystem::new([[p, q], [q, s]], [b0, b1]).unwrap();
            let key = keygen(2, seed).unwrap();
            let Ok(m) = encrypt(&sys, &key) else { return Ok(()) };
            prop_assert_eq!(m.a_matrix, *sys.a());
            let y = classical_solve(&m.system().unwrap());
            let x = decrypt(&y, &key).unwrap();
            let want = classical_solve(&sys);
            prop_assert!((x[0] - want[0]).abs() < 1e-9 && (x[1] - want[1]).abs() < 1e-9);
        }
    }
}
