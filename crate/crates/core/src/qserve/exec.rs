use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::wire::{BasisResult, BasisSpec, ExecMode, Job, JobResult};
use super::QserveError;
use crate::circ::{basis_change, parse_text, Circuit, CliffordT, Gate};
use crate::qsim::{
    postselect, postselect_counts, run_statevector, sample_counts_with, Counts, SimError,
    StateVector, MAX_QUBITS,
};

/// With probability `p`, applies X, Y or Z (uniformly) to `qubit`.
pub fn apply_depolarizing<R: Rng + ?Sized>(
    state: &mut StateVector,
    p: f64,
    qubit: usize,
    rng: &mut R,
) -> Result<(), QserveError> {
    check_noise(p)?;
    if p == 0.0 || rng.gen::<f64>() >= p {
        return Ok(());
    }
    let pauli = [CliffordT::X, CliffordT::Y, CliffordT::Z][rng.gen_range(0..3)];
    state.apply_matrix1(qubit, &pauli.matrix())?;
    Ok(())
}

fn check_noise(p: f64) -> Result<(), QserveError> {
    if (0.0..=0.5).contains(&p) {
        Ok(())
    } else {
        Err(QserveError::BadRequest(format!(
            "noise_p {p} outside [0, 0.5]"
        )))
    }
}

struct Checked {
    circuit: Circuit,
    shots: u64,
    seed: u64,
}

fn check(job: &Job) -> Result<Checked, Box<JobResult>> {
    let err = |code: &str, detail: String| Box::new(JobResult::error(&job.id, code, detail));
    let circuit = parse_text(&job.circuit).map_err(|e| err("parse_error", e.to_string()))?;
    let n = circuit.n_qubits();
    let reject = |detail: String| Err(err("bad_request", detail));
    if n > MAX_QUBITS {
        return reject(format!("{n} qubits exceeds the limit of {MAX_QUBITS}"));
    }
    if let Some(ps) = job.postselect {
        if ps.qubit >= n || ps.outcome > 1 {
            return reject(format!(
                "postselect q{} = {} invalid for {n} qubits",
                ps.qubit, ps.outcome
            ));
        }
    }
    if let Some(b) = job.bases.iter().find(|b| b.qubit >= n) {
        return reject(format!("basis qubit q{} out of range", b.qubit));
    }
    if let Some(p) = job.noise_p {
        if let Err(e) = check_noise(p) {
            return reject(e.to_string());
        }
    }
    match job.mode {
        ExecMode::Analytic => {
            if job.noise_p.is_some_and(|p| p > 0.0) {
                return reject("noise requires sampled mode".into());
            }
            Ok(Checked {
                circuit,
                shots: 0,
                seed: 0,
            })
        }
        ExecMode::Sampled => {
            let shots = match job.shots {
                Some(s) if s >= 1 => s,
                _ => return reject("sampled mode needs shots >= 1".into()),
            };
            let Some(seed) = job.seed else {
                return reject("sampled mode needs a seed".into());
            };
            if job.bases.is_empty() {
                return reject("sampled mode needs at least one basis".into());
            }
            Ok(Checked {
                circuit,
                shots,
                seed,
            })
        }
    }
}

/// Runs one job in isolation. Every failure becomes an error result carrying
/// the job id.
pub fn execute(job: &Job) -> JobResult {
    let checked = match check(job) {
        Ok(c) => c,
        Err(e) => return *e,
    };
    let outcome = match job.mode {
        ExecMode::Analytic => run_analytic(job, &checked.circuit),
        ExecMode::Sampled => run_sampled(job, &checked),
    };
    outcome.unwrap_or_else(|e| JobResult::error(&job.id, "execution_error", e.to_string()))
}

fn run_analytic(job: &Job, circuit: &Circuit) -> Result<JobResult, QserveError> {
    let state = run_statevector(circuit, StateVector::zero(circuit.n_qubits())?)?;
    let (state, p) = match job.postselect {
        Some(ps) => postselect(&state, ps.qubit, ps.outcome)?,
        None => (state, 1.0),
    };
    Ok(JobResult {
        id: job.id.clone(),
        amplitudes: Some(state.amplitudes().iter().map(|z| [z.re, z.im]).collect()),
        success_probability: Some(p),
        ..JobResult::default()
    })
}

fn run_sampled(job: &Job, checked: &Checked) -> Result<JobResult, QserveError> {
    let circuit = &checked.circuit;
    let noiseless = match job.noise_p {
        Some(p) if p > 0.0 => None,
        _ => Some(run_statevector(
            circuit,
            StateVector::zero(circuit.n_qubits())?,
        )?),
    };
    let mut results = Vec::with_capacity(job.bases.len());
    for (i, spec) in job.bases.iter().enumerate() {
        // Each basis draws from its own stream of the job's seed.
        let mut rng = ChaCha8Rng::seed_from_u64(checked.seed);
        rng.set_stream(i as u64);
        let raw = match &noiseless {
            Some(state) => {
                let mut state = state.clone();
                for g in basis_change(spec.basis.into(), spec.qubit) {
                    state.apply(&g)?;
                }
                sample_counts_with(&state, checked.shots, &mut rng)?
            }
            None => noisy_counts(
                circuit,
                spec,
                job.noise_p.unwrap_or(0.0),
                checked.shots,
                &mut rng,
            )?,
        };
        results.push(filter(spec, raw, job)?);
    }
    Ok(JobResult {
        id: job.id.clone(),
        results: Some(results),
        ..JobResult::default()
    })
}

/// One noisy trajectory per shot; the basis rotation itself is noiseless.
fn noisy_counts(
    circuit: &Circuit,
    spec: &BasisSpec,
    p: f64,
    shots: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Counts, QserveError> {
    let n = circuit.n_qubits();
    let change: Vec<Gate> = basis_change(spec.basis.into(), spec.qubit);
    let mut table: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let mut state = StateVector::zero(n)?;
        for g in circuit.gates() {
            state.apply(g)?;
            for q in g.qubits() {
                apply_depolarizing(&mut state, p, q, rng)?;
            }
        }
        for g in &change {
            state.apply(g)?;
        }
        let one = sample_counts_with(&state, 1, rng)?;
        let (key, _) = one.table().iter().next().expect("one shot drawn");
        *table.entry(key.clone()).or_insert(0) += 1;
    }
    Ok(Counts::new(n, table)?)
}

fn filter(spec: &BasisSpec, raw: Counts, job: &Job) -> Result<BasisResult, QserveError> {
    let raw_shots = raw.shots();
    let kept = match job.postselect {
        None => raw,
        Some(ps) => match postselect_counts(&raw, ps.qubit, ps.outcome) {
            Ok(c) => c,
            Err(SimError::NoSurvivingShots) => Counts::new(raw.n_qubits(), BTreeMap::new())?,
            Err(e) => return Err(e.into()),
        },
    };
    Ok(BasisResult {
        basis: spec.basis,
        qubit: spec.qubit,
        kept_shots: kept.shots(),
        counts: kept.table().clone(),
        raw_shots,
    })
}

/// Decodes one request payload and answers it. Payloads that are not a job
/// object get a `frame_error` reply with whatever id could be recovered.
pub fn handle_payload(payload: &[u8]) -> JobResult {
    let value: serde_json::Value = match serde_json::from_slice(payload) {
        Ok(v) => v,
        Err(e) => return JobResult::error("", "frame_error", format!("invalid JSON: {e}")),
    };
    let id = value
        .get("id")
        .and_then(|v| v.as_str())
        .unwrap_or_default()
        .to_string();
    match serde_json::from_value::<Job>(value) {
        Ok(job) => execute(&job),
        Err(e) => JobResult::error(id, "bad_request", e.to_string()),
    }
}

pub(crate) fn encode(result: &JobResult) -> Vec<u8> {
    serde_json::to_vec(result).expect("job results always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qserve::wire::{Postselect, WireBasis};

    const BELL: &str = "qubits 2\nh q0\ncx q0 q1\n";

    #[test]
    fn depolarizing_p0_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let before = s.clone();
        for _ in 0..100 {
            apply_depolarizing(&mut s, 0.0, 0, &mut rng).unwrap();
        }
        assert_eq!(s, before);
        assert!(apply_depolarizing(&mut s, 0.6, 0, &mut rng).is_err());
    }

    #[test]
    fn depolarizing_half_gives_one_third() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mut z = 0.0;
        for _ in 0..n {
            let mut s = StateVector::zero(1).unwrap();
            apply_depolarizing(&mut s, 0.5, 0, &mut rng).unwrap();
            z += s.amplitudes()[0].norm_sqr() - s.amplitudes()[1].norm_sqr();
        }
        let mean = z / n as f64;
        // Var(Z) = 1 − (1/3)², so σ ≈ 0.943/√n.
        let sigma = (1.0f64 - 1.0 / 9.0).sqrt() / (n as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() < 5.0 * sigma, "{mean}");
    }

    #[test]
    fn analytic_bell() {
        let r = execute(&Job::analytic("bell", BELL));
        assert!(!r.is_error(), "{r:?}");
        let amps = r.amplitudes.unwrap();
        let norm: f64 = amps.iter().map(|[a, b]| a * a + b * b).sum();
        assert!((norm - 1.0).abs() < 1e-9);
        assert!((amps[0][0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(r.success_probability, Some(1.0));
    }

    #[test]
    fn parse_errors_name_the_position() {
        let r = execute(&Job::analytic("bad", "qubits 2\nh q0\nfoo q1\n"));
        assert_eq!(r.error.as_deref(), Some("parse_error"));
        assert!(r.detail.unwrap().contains("line 3, column 1"));
        assert_eq!(r.id, "bad");
    }

    #[test]
    fn request_validation() {
        let mut j = Job::sampled("s", BELL, 0, 1);
        j.bases.push(BasisSpec {
            basis: WireBasis::Z,
            qubit: 0,
        });
        assert_eq!(execute(&j).error.as_deref(), Some("bad_request"));
        j.shots = Some(10);
        j.postselect = Some(Postselect {
            qubit: 5,
            outcome: 1,
        });
        assert_eq!(execute(&j).error.as_deref(), Some("bad_request"));
        let mut a = Job::analytic("a", BELL);
        a.noise_p = Some(0.1);
        assert_eq!(execute(&a).error.as_deref(), Some("bad_request"));
        a.noise_p = None;
        a.postselect = Some(Postselect {
            qubit: 0,
            outcome: 1,
        });
        let ok = execute(&a);
        assert!((ok.success_probability.unwrap() - 0.5).abs() < 1e-12);
        let zero = execute(&Job {
            circuit: "qubits 1\n".into(),
            ..a
        });
        assert_eq!(zero.error.as_deref(), Some("execution_error"));
    }

    #[test]
    fn sampled_totals_and_determinism() {
        let mut j = Job::sampled("s", BELL, 1000, 9);
        for basis in [WireBasis::Z, WireBasis::X] {
            j.bases.push(BasisSpec { basis, qubit: 0 });
        }
        j.postselect = Some(Postselect {
            qubit: 1,
            outcome: 0,
        });
        let r = execute(&j);
        let results = r.results.clone().unwrap();
        for b in &results {
            assert_eq!(b.raw_shots, 1000);
            assert_eq!(b.counts.values().sum::<u64>(), b.kept_shots);
            assert!(b.counts.keys().all(|k| k.as_bytes()[1] == b'0'));
        }
        // Z basis: q0 == q1 always, so only "00" survives.
        assert_eq!(results[0].counts.keys().collect::<Vec<_>>(), vec!["00"]);
        assert_eq!(execute(&j), r);
        j.seed = Some(10);
        assert_ne!(execute(&j), r);
    }

    #[test]
    fn noisy_sampling_stays_near_ideal_for_small_p() {
        let mut j = Job::sampled("n", "qubits 1\nx q0\n", 2000, 4);
        j.bases.push(BasisSpec {
            basis: WireBasis::Z,
            qubit: 0,
        });
        j.noise_p = Some(0.05);
        let r = execute(&j);
        let b = &r.results.unwrap()[0];
        let ones = *b.counts.get("1").unwrap_or(&0) as f64 / 2000.0;
        // Expected flip rate 2p/3 ≈ 0.033.
        assert!(ones < 1.0 && ones > 0.9, "{ones}");
    }

    #[test]
    fn payload_errors() {
        let r = handle_payload(b"not json");
        assert_eq!(
            (r.id.as_str(), r.error.as_deref()),
            ("", Some("frame_error"))
        );
        let r = handle_payload(br#"{"id":"k","circuit":"qubits 1\n","mode":"warp"}"#);
        assert_eq!(
            (r.id.as_str(), r.error.as_deref()),
            ("k", Some("bad_request"))
        );
    }
}
