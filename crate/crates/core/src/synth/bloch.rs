use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::table::Mat2;
use super::{check_budget, shared_table, SynthError};
use crate::fmt::sig;
use crate::qsim::Unitary;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochPoint {
    /// Bloch point of U|0⟩.
    pub fn of_unitary(u: &Unitary) -> BlochPoint {
        let m: Mat2 = u.entries().try_into().expect("2x2 unitary");
        BlochPoint::of_matrix(&m)
    }

    pub(crate) fn of_matrix(m: &Mat2) -> BlochPoint {
        let (a, b) = (m[0], m[2]);
        let c = a.conj() * b;
        BlochPoint {
            x: 2.0 * c.re,
            y: 2.0 * c.im,
            z: a.norm_sqr() - b.norm_sqr(),
        }
    }

    pub fn distance(&self, other: &BlochPoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    fn key(&self) -> [i64; 3] {
        [self.x, self.y, self.z].map(|v| (v * 1e9).round() as i64)
    }
}

/// Distinct Bloch points of U|0⟩ over all Clifford+T unitaries within a T budget.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSet {
    pub t_budget: usize,
    /// Sorted by rounded coordinates.
    pub points: Vec<BlochPoint>,
}

impl CoverageSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &BlochPoint) -> bool {
        let key = p.key();
        self.points.binary_search_by(|q| q.key().cmp(&key)).is_ok()
    }
}

pub fn enumerate_states(t_budget: usize) -> Result<CoverageSet, SynthError> {
    check_budget(t_budget)?;
    let table = shared_table();
    let mut points: BTreeMap<[i64; 3], BlochPoint> = BTreeMap::new();
    for k in 0..=t_budget {
        for entry in table.level(k) {
            let p = BlochPoint::of_matrix(entry.matrix());
            points.entry(p.key()).or_insert(p);
        }
    }
    Ok(CoverageSet {
        t_budget,
        points: points.into_values().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkTag {
    Target,
    Approx,
}

impl MarkTag {
    pub fn name(self) -> &'static str {
        match self {
            MarkTag::Target => "target",
            MarkTag::Approx => "approx",
        }
    }
}

/// `x,y,z,tag` CSV: reachable points first, then marked points, 12 significant digits.
pub fn export_bloch_csv(coverage: &CoverageSet, marked: &[(BlochPoint, MarkTag)]) -> String {
    let mut out = String::from("x,y,z,tag\n");
    let rows = coverage
        .points
        .iter()
        .map(|p| (p, "reachable"))
        .chain(marked.iter().map(|(p, tag)| (p, tag.name())));
    for (p, tag) in rows {
        writeln!(
            out,
            "{},{},{},{tag}",
            sig(p.x, 12),
            sig(p.y, 12),
            sig(p.z, 12)
        )
        .unwrap();
    }
    out
}
