use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SimError, StateVector};

/// Histogram of measured bitstrings (leftmost character is qubit 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    n_qubits: usize,
    shots: u64,
    table: BTreeMap<String, u64>,
}

impl Counts {
    pub fn new(n_qubits: usize, table: BTreeMap<String, u64>) -> Result<Counts, SimError> {
        for key in table.keys() {
            if key.len() != n_qubits || !key.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(SimError::BadBitstring(key.clone()));
            }
        }
        let shots = table.values().sum();
        Ok(Counts {
            n_qubits,
            shots,
            table,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn table(&self) -> &BTreeMap<String, u64> {
        &self.table
    }

    pub fn get(&self, bitstring: &str) -> u64 {
        self.table.get(bitstring).copied().unwrap_or(0)
    }

    /// Shots whose `qubit` reads 0 and 1 respectively.
    pub fn marginal(&self, qubit: usize) -> Result<(u64, u64), SimError> {
        if qubit >= self.n_qubits {
            return Err(SimError::IndexOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(self.table.iter().fold((0, 0), |(zeros, ones), (k, &n)| {
            if k.as_bytes()[qubit] == b'0' {
                (zeros + n, ones)
            } else {
                (zeros, ones + n)
            }
        }))
    }
}

/// Draws `shots` i.i.d. outcomes from the state's Born distribution using
/// `ChaCha8Rng` seeded with `seed`.
pub fn sample_counts(state: &StateVector, shots: u64, seed: u64) -> Result<Counts, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_counts_with(state, shots, &mut rng)
}

pub(crate) fn sample_counts_with<R: Rng + ?Sized>(
    state: &StateVector,
    shots: u64,
    rng: &mut R,
) -> Result<Counts, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    let mut cumulative = Vec::with_capacity(state.amplitudes().len());
    let mut total = 0.0;
    let mut last_nonzero = 0;
    for (i, p) in state.probabilities().into_iter().enumerate() {
        total += p;
        cumulative.push(total);
        if p > 0.0 {
            last_nonzero = i;
        }
    }
    let mut hits = vec![0u64; cumulative.len()];
    for _ in 0..shots {
        let u = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u).min(last_nonzero);
        hits[idx] += 1;
    }
    let n = state.n_qubits();
    let table = hits
        .into_iter()
        .enumerate()
        .filter(|(_, h)| *h > 0)
        .map(|(i, h)| (format!("{i:0n$b}"), h))
        .collect();
    Counts::new(n, table)
}

/// Keeps the shots whose `qubit` reads `outcome`.
pub fn postselect_counts(counts: &Counts, qubit: usize, outcome: u8) -> Result<Counts, SimError> {
    if counts.shots == 0 {
        return Err(SimError::EmptyCounts);
    }
    if qubit >= counts.n_qubits {
        return Err(SimError::IndexOutOfRange {
            index: qubit,
            n_qubits: counts.n_qubits,
        });
    }
    let want = if outcome == 0 { b'0' } else { b'1' };
    let table: BTreeMap<String, u64> = counts
        .table
        .iter()
        .filter(|(k, _)| k.as_bytes()[qubit] == want)
        .map(|(k, n)| (k.clone(), *n))
        .collect();
    let kept = Counts::new(counts.n_qubits, table)?;
    if kept.shots == 0 {
        return Err(SimError::NoSurvivingShots);
    }
    Ok(kept)
}
