use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use super::{check_budget, CliffordTSequence, SynthError};
use crate::circ::CliffordT;
use crate::qsim::Unitary;

pub(crate) type Mat2 = [Complex64; 4];

/// Rounded, phase-canonical entries (re and im of all four, scaled by 1e9).
pub(crate) type Key = [i64; 8];

const CLIFFORD_GENERATORS: [CliffordT; 6] = [
    CliffordT::X,
    CliffordT::Y,
    CliffordT::Z,
    CliffordT::H,
    CliffordT::S,
    CliffordT::Sdg,
];

fn identity() -> Mat2 {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    [l, o, o, l]
}

pub(crate) fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub(crate) fn word_matrix(word: &[CliffordT]) -> Mat2 {
    word.iter()
        .fold(identity(), |acc, g| mul(&g.matrix(), &acc))
}

/// Rotates the first entry of non-negligible magnitude onto the positive real
/// axis, then rounds to 1e-9.
pub(crate) fn key_of(m: &Mat2) -> Key {
    let pivot = m
        .iter()
        .find(|z| z.norm() > 1e-7)
        .expect("unitary has a nonzero entry");
    let phase = pivot.conj() / pivot.norm();
    let mut key = [0i64; 8];
    for (i, z) in m.iter().enumerate() {
        let w = z * phase;
        key[i] = (w.re * 1e9).round() as i64;
        key[i + 4] = (w.im * 1e9).round() as i64;
    }
    key
}

fn sim(a: &Mat2, b: &Mat2) -> f64 {
    let tr: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    tr.norm() / 2.0
}

#[derive(Debug, Clone)]
pub struct TableEntry {
    matrix: Mat2,
    sequence: CliffordTSequence,
}

impl TableEntry {
    pub fn sequence(&self) -> &CliffordTSequence {
        &self.sequence
    }

    pub fn t_count(&self) -> usize {
        self.sequence.t_count()
    }

    pub fn unitary(&self) -> Unitary {
        Unitary::from_2x2(self.matrix)
    }

    pub(crate) fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    /// ½|Tr(target† U)|; `target` must be 2x2.
    pub fn similarity_to(&self, target: &Unitary) -> f64 {
        let t: Mat2 = target.entries().try_into().expect("2x2 target");
        sim(&t, &self.matrix)
    }
}

/// All single-qubit Clifford+T unitaries (modulo phase) up to a T-count
/// budget, grouped by minimal T-count.
#[derive(Debug, Clone)]
pub struct SynthTable {
    levels: Vec<Vec<TableEntry>>,
    index: HashMap<Key, (usize, usize)>,
}

impl SynthTable {
    pub fn build(t_budget: usize) -> Result<SynthTable, SynthError> {
        check_budget(t_budget)?;
        let cliffords = clifford_group();
        let mut index: HashMap<Key, (usize, usize)> = HashMap::new();
        let mut levels: Vec<Vec<TableEntry>> = Vec::with_capacity(t_budget + 1);

        let level0: BTreeMap<Key, TableEntry> = cliffords
            .iter()
            .map(|e| (key_of(&e.matrix), e.clone()))
            .collect();
        push_level(&mut levels, &mut index, level0);

        let t = CliffordT::T.matrix();
        for k in 1..=t_budget {
            let mut next: BTreeMap<Key, TableEntry> = BTreeMap::new();
            for prev in &levels[k - 1] {
                let tu = mul(&t, &prev.matrix);
                for c in &cliffords {
                    let matrix = mul(&c.matrix, &tu);
                    let key = key_of(&matrix);
                    if index.contains_key(&key) {
                        continue;
                    }
                    let mut gates = Vec::with_capacity(prev.sequence.len() + 1 + c.sequence.len());
                    gates.extend_from_slice(prev.sequence.gates());
                    gates.push(CliffordT::T);
                    gates.extend_from_slice(c.sequence.gates());
                    let sequence = CliffordTSequence::new(gates);
                    match next.get_mut(&key) {
                        Some(existing) if existing.sequence.rank() <= sequence.rank() => {}
                        Some(existing) => *existing = TableEntry { matrix, sequence },
                        None => {
                            next.insert(key, TableEntry { matrix, sequence });
                        }
                    }
                }
            }
            push_level(&mut levels, &mut index, next);
        }
        Ok(SynthTable { levels, index })
    }

    pub fn t_budget(&self) -> usize {
        self.levels.len() - 1
    }

    /// Entries whose minimal T-count is exactly `t_count`.
    pub fn level(&self, t_count: usize) -> &[TableEntry] {
        self.levels.get(t_count).map_or(&[], |l| l.as_slice())
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// The entry equal to `u` up to global phase, if it is in the table.
    pub fn lookup(&self, u: &Unitary) -> Option<&TableEntry> {
        let m: Mat2 = u.entries().try_into().ok()?;
        self.index
            .get(&key_of(&m))
            .map(|&(k, i)| &self.levels[k][i])
    }
}

fn push_level(
    levels: &mut Vec<Vec<TableEntry>>,
    index: &mut HashMap<Key, (usize, usize)>,
    level: BTreeMap<Key, TableEntry>,
) {
    let k = levels.len();
    let mut entries = Vec::with_capacity(level.len());
    for (i, (key, entry)) in level.into_iter().enumerate() {
        index.insert(key, (k, i));
        entries.push(entry);
    }
    levels.push(entries);
}

/// The 24 single-qubit Cliffords modulo phase, each with its shortest word
/// (lexicographically smallest among equals) over X, Y, Z, H, S, S†.
pub(crate) fn clifford_group() -> Vec<TableEntry> {
    let mut found: BTreeMap<Key, TableEntry> = BTreeMap::new();
    let mut len = 0;
    while found.len() < 24 {
        let mut digits = vec![0usize; len];
        loop {
            let word: Vec<CliffordT> = digits.iter().map(|&d| CLIFFORD_GENERATORS[d]).collect();
            let matrix = word_matrix(&word);
            found.entry(key_of(&matrix)).or_insert_with(|| TableEntry {
                matrix,
                sequence: CliffordTSequence::new(word),
            });
            // odometer over words of this length, last position fastest
            let Some(pos) = digits
                .iter()
                .rposition(|&d| d + 1 < CLIFFORD_GENERATORS.len())
            else {
                break;
            };
            digits[pos] += 1;
            digits[pos + 1..].iter_mut().for_each(|d| *d = 0);
        }
        len += 1;
    }
    found.into_values().collect()
}
