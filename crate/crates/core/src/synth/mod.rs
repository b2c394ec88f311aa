//! Single-qubit Clifford+T synthesis by exhaustive enumeration.
//!
//! Every single-qubit Clifford+T unitary with T-count `k` can be written as
//! `C_k T C_{k-1} T ... T C_0` with Cliffords `C_j` (T† = S†T, so T† costs the
//! same as T). [`SynthTable`] grows these forms one T at a time, keeping one
//! representative per unitary modulo global phase, which makes every search
//! below exact and deterministic.

mod bloch;
mod table;

use std::sync::OnceLock;

use thiserror::Error;

use crate::circ::{Circuit, CliffordT, RyApproximations};
use crate::qsim::Unitary;

pub use bloch::{enumerate_states, export_bloch_csv, BlochPoint, CoverageSet, MarkTag};
pub use table::{SynthTable, TableEntry};

/// Resource guard on the T budget.
pub const MAX_T_BUDGET: usize = 8;

const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("T budget {0} exceeds the limit of {MAX_T_BUDGET}")]
    BudgetTooLarge(usize),
    #[error("expected a 2x2 matrix, got {0}x{0}")]
    NotSingleQubit(usize),
    #[error("matrix is not unitary within 1e-10")]
    NotUnitary,
}

/// A gate word over the Clifford+T alphabet, applied left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CliffordTSequence {
    gates: Vec<CliffordT>,
}

impl CliffordTSequence {
    pub fn new(gates: Vec<CliffordT>) -> CliffordTSequence {
        CliffordTSequence { gates }
    }

    pub fn gates(&self) -> &[CliffordT] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_t_type()).count()
    }

    pub fn count(&self, op: CliffordT) -> usize {
        self.gates.iter().filter(|&&g| g == op).count()
    }

    /// Gate-by-gate matrix product (last gate leftmost).
    pub fn unitary(&self) -> Unitary {
        Unitary::from_2x2(table::word_matrix(&self.gates))
    }

    pub fn inverse(&self) -> CliffordTSequence {
        CliffordTSequence {
            gates: self.gates.iter().rev().map(|g| g.inverse()).collect(),
        }
    }

    /// The sequence as a one-qubit circuit.
    pub fn to_circuit(&self) -> Circuit {
        Circuit::from_gates(1, self.gates.iter().map(|g| g.on(0)).collect())
            .expect("single-qubit gates on q0")
    }

    /// Ordering used to break similarity ties: T-count, length, then gate order.
    fn rank(&self) -> (usize, usize, &[CliffordT]) {
        (self.t_count(), self.gates.len(), &self.gates)
    }
}

impl std::fmt::Display for CliffordTSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<&str> = self.gates.iter().map(|g| g.name()).collect();
        f.write_str(&names.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthResult {
    pub sequence: CliffordTSequence,
    pub unitary: Unitary,
    pub similarity: f64,
    pub target: Unitary,
}

fn check_single_qubit(u: &Unitary) -> Result<(), SynthError> {
    if u.dim() != 2 {
        return Err(SynthError::NotSingleQubit(u.dim()));
    }
    if !u.is_unitary(1e-10) {
        return Err(SynthError::NotUnitary);
    }
    Ok(())
}

/// ½·|Tr(u† v)|, the global-phase-invariant overlap of two one-qubit unitaries.
pub fn similarity(u: &Unitary, v: &Unitary) -> Result<f64, SynthError> {
    check_single_qubit(u)?;
    check_single_qubit(v)?;
    Ok(u.similarity(v))
}

/// R_y(angle) = exp(−i·angle·Y/2).
pub fn ry_unitary(angle: f64) -> Unitary {
    Unitary::from_2x2(crate::circ::ry_matrix(angle))
}

/// Enumerated forms for budgets up to [`MAX_T_BUDGET`], built once per process.
pub fn shared_table() -> &'static SynthTable {
    static TABLE: OnceLock<SynthTable> = OnceLock::new();
    TABLE.get_or_init(|| SynthTable::build(MAX_T_BUDGET).expect("budget within guard"))
}

fn check_budget(t_budget: usize) -> Result<(), SynthError> {
    if t_budget > MAX_T_BUDGET {
        Err(SynthError::BudgetTooLarge(t_budget))
    } else {
        Ok(())
    }
}

/// Best Clifford+T approximation of `target` using at most `t_budget` T/T† gates.
///
/// Similarities within 1e-12 count as ties, resolved by lower T-count, then
/// shorter sequence, then lexicographic gate order.
pub fn approximate_unitary(target: &Unitary, t_budget: usize) -> Result<SynthResult, SynthError> {
    check_single_qubit(target)?;
    check_budget(t_budget)?;
    let best = maximizers(target, t_budget)?
        .into_iter()
        .min_by(|a, b| a.rank().cmp(&b.rank()))
        .expect("the Clifford group is never empty");
    Ok(result_for(target, best))
}

/// Every enumerated sequence whose similarity to `target` ties the maximum.
pub fn maximizers(target: &Unitary, t_budget: usize) -> Result<Vec<CliffordTSequence>, SynthError> {
    check_single_qubit(target)?;
    check_budget(t_budget)?;
    let table = shared_table();
    let scored: Vec<(f64, &TableEntry)> = (0..=t_budget)
        .flat_map(|k| table.level(k))
        .map(|e| (e.similarity_to(target), e))
        .collect();
    let top = scored.iter().map(|(s, _)| *s).fold(f64::MIN, f64::max);
    Ok(scored
        .into_iter()
        .filter(|(s, _)| top - s <= TIE_TOLERANCE)
        .map(|(_, e)| e.sequence().clone())
        .collect())
}

fn result_for(target: &Unitary, sequence: CliffordTSequence) -> SynthResult {
    let unitary = sequence.unitary();
    let similarity = target.similarity(&unitary);
    SynthResult {
        sequence,
        unitary,
        similarity,
        target: target.clone(),
    }
}

/// Approximation table for a set of RY angles. Each angle is synthesized
/// independently; an angle and its negation reuse one search through the
/// inverted sequence.
pub fn ry_approximations(
    angles: &[f64],
    t_budget: usize,
) -> Result<(RyApproximations, Vec<(f64, SynthResult)>), SynthError> {
    let mut table = RyApproximations::new();
    let mut results: Vec<(f64, SynthResult)> = Vec::new();
    for &angle in angles {
        if table.get(angle).is_some() {
            continue;
        }
        let result = match results
            .iter()
            .find(|(a, _)| (a + angle).abs() <= crate::circ::ANGLE_TOLERANCE)
        {
            Some((_, mirror)) => result_for(&ry_unitary(angle), mirror.sequence.inverse()),
            None => approximate_unitary(&ry_unitary(angle), t_budget)?,
        };
        table.insert(angle, result.sequence.gates().to_vec());
        results.push((angle, result));
    }
    Ok((table, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::circuit_unitary;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn op(g: CliffordT) -> Unitary {
        Unitary::from_2x2(g.matrix())
    }

    #[test]
    fn similarity_cases() {
        let h = op(CliffordT::H);
        assert!((similarity(&h, &h).unwrap() - 1.0).abs() < 1e-15);
        let i = Unitary::identity(2);
        assert_eq!(similarity(&i, &op(CliffordT::X)).unwrap(), 0.0);
        assert_eq!(
            similarity(&Unitary::identity(4), &i),
            Err(SynthError::NotSingleQubit(4))
        );
        let bad = Unitary::from_2x2([Complex64::new(2.0, 0.0); 4]);
        assert_eq!(similarity(&bad, &i), Err(SynthError::NotUnitary));
    }

    #[test]
    fn exact_clifford_target() {
        let r = approximate_unitary(&op(CliffordT::H), 3).unwrap();
        assert_eq!(r.sequence.gates(), &[CliffordT::H]);
        assert_eq!(r.sequence.t_count(), 0);
        assert!((r.similarity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_t_target() {
        for budget in 1..=3 {
            let r = approximate_unitary(&op(CliffordT::T), budget).unwrap();
            assert_eq!(r.sequence.t_count(), 1);
            assert!((r.similarity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_is_the_empty_word() {
        let r = approximate_unitary(&Unitary::identity(2), 2).unwrap();
        assert!(r.sequence.is_empty());
    }

    #[test]
    fn budget_guard() {
        assert_eq!(
            approximate_unitary(&Unitary::identity(2), 9),
            Err(SynthError::BudgetTooLarge(9))
        );
    }

    #[test]
    fn ry_target_at_budget_seven() {
        // Frozen from the exhaustive search; an independent numpy enumeration of
        // all T-count <= 7 unitaries gives the same optimum.
        let target = ry_unitary((-28.67f64).to_radians());
        let r = approximate_unitary(&target, 7).unwrap();
        assert!(
            (r.similarity - 0.996786488010).abs() < 1e-9,
            "{}",
            r.similarity
        );
        assert_eq!(r.sequence.t_count(), 7);
        assert!(r.unitary.max_abs_diff(&r.sequence.unitary()) < 1e-12);
        assert!((r.similarity - r.target.similarity(&r.unitary)).abs() < 1e-12);
    }

    #[test]
    fn best_score_is_monotone_in_budget() {
        let target = ry_unitary(0.731);
        let scores: Vec<f64> = (0..=MAX_T_BUDGET)
            .map(|k| approximate_unitary(&target, k).unwrap().similarity)
            .collect();
        assert!(
            scores.windows(2).all(|w| w[1] >= w[0] - 1e-15),
            "{scores:?}"
        );
    }

    #[test]
    fn mirrored_angles_share_a_search() {
        let a = (-28.67f64).to_radians();
        let (table, results) = ry_approximations(&[a, -a, a], 5).unwrap();
        assert_eq!(table.len(), 2);
        assert!((results[0].1.similarity - results[1].1.similarity).abs() < 1e-12);
        let direct = approximate_unitary(&ry_unitary(-a), 5).unwrap();
        assert!((direct.similarity - results[1].1.similarity).abs() < 1e-12);
    }

    #[test]
    fn sequence_circuit_matches_unitary() {
        let seq =
            CliffordTSequence::new(vec![CliffordT::H, CliffordT::T, CliffordT::S, CliffordT::H]);
        let u = circuit_unitary(&seq.to_circuit()).unwrap();
        assert!(u.max_abs_diff(&seq.unitary()) < 1e-12);
        assert_eq!(seq.to_string(), "h t s h");
        assert_eq!(
            seq.inverse().gates(),
            &[CliffordT::H, CliffordT::Sdg, CliffordT::Tdg, CliffordT::H]
        );
    }

    #[test]
    fn random_words_are_covered() {
        let table = shared_table();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let budget = rng.gen_range(0..=5usize);
            let len = rng.gen_range(0..20);
            let mut t_left = budget;
            let word: Vec<CliffordT> = (0..len)
                .filter_map(|_| {
                    let g = CliffordT::ALL[rng.gen_range(0..8)];
                    if g.is_t_type() {
                        if t_left == 0 {
                            return None;
                        }
                        t_left -= 1;
                    }
                    Some(g)
                })
                .collect();
            let u = CliffordTSequence::new(word).unitary();
            let hit = table.lookup(&u).expect("covered");
            assert!(hit.t_count() <= budget);
            assert!(hit.similarity_to(&u) >= 1.0 - 1e-9);
        }
    }

    proptest! {
        #[test]
        fn similarity_symmetric_and_phase_blind(a in -7.0f64..7.0, b in -7.0f64..7.0, phi in -7.0f64..7.0, k in 0usize..8) {
            let u = &ry_unitary(a) * &op(CliffordT::ALL[k]);
            let v = ry_unitary(b);
            let s = similarity(&u, &v).unwrap();
            prop_assert!((s - similarity(&v, &u).unwrap()).abs() < 1e-12);
            let shifted = v.scaled(Complex64::from_polar(1.0, phi));
            prop_assert!((s - similarity(&u, &shifted).unwrap()).abs() < 1e-12);
            prop_assert!(s <= 1.0 + 1e-12);
        }
    }
}
