//! Multi-indices, graded-lexicographic index sets, and box domains.

use super::SpaceError;
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

/// A d-dimensional multi-index of nonnegative degrees.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|alpha|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn entry(&self, j: usize) -> u32 {
        self.0[j]
    }

    /// Graded-lexicographic comparison: total degree first, entries
    /// left-to-right inside a grade.
    pub fn graded_lex_cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// An ordered, duplicate-free list of multi-indices in graded-lex order,
/// tagged with its hierarchy level.
#[derive(Clone, Debug)]
pub struct IndexSet {
    indices: Vec<MultiIndex>,
    level: usize,
}

impl IndexSet {
    /// All multi-indices with total degree at most `level` in `dim`
    /// variables, graded-lex order. The size is `C(level + dim, dim)`.
    pub fn total_degree(level: usize, dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let mut indices = Vec::with_capacity(binomial(level + dim, dim));
        let mut current = vec![0u32; dim];
        for grade in 0..=level {
            push_compositions(&mut indices, &mut current, 0, grade as u32);
        }
        Self { indices, level }
    }

    /// An explicit index list. Rejects duplicates and mixed dimensions;
    /// always stores graded-lex order so hierarchies stay deterministic.
    pub fn explicit(mut indices: Vec<MultiIndex>, level: usize) -> Result<Self, SpaceError> {
        if indices.is_empty() {
            return Err(SpaceError::EmptyIndexSet);
        }
        let dim = indices[0].dim();
        if indices.iter().any(|ix| ix.dim() != dim) {
            return Err(SpaceError::MixedIndexDimension);
        }
        indices.sort_by(|a, b| a.graded_lex_cmp(b));
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(SpaceError::DuplicateIndex);
        }
        Ok(Self { indices, level })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.indices[0].dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }

    pub fn max_degree(&self) -> u32 {
        self.indices.iter().map(|ix| ix.degree()).max().unwrap_or(0)
    }

    /// Largest single-coordinate degree; sets the univariate recurrence depth.
    pub fn max_entry(&self) -> u32 {
        self.indices
            .iter()
            .flat_map(|ix| ix.entries().iter().copied())
            .max()
            .unwrap_or(0)
    }
}

fn push_compositions(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, slot: usize, remaining: u32) {
    let d = current.len();
    if slot == d - 1 {
        current[slot] = remaining;
        out.push(MultiIndex::new(current.clone()));
        return;
    }
    for v in 0..=remaining {
        current[slot] = v;
        push_compositions(out, current, slot + 1, remaining - v);
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k.min(n));
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (n - i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as usize
}

/// A compact axis-aligned box with per-axis bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self, SpaceError> {
        if bounds.is_empty() {
            return Err(SpaceError::EmptyDomain);
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SpaceError::BadBounds { lo, hi });
            }
        }
        Ok(Self { bounds })
    }

    /// `[0, 1]^d`.
    pub fn unit_cube(dim: usize) -> Self {
        Self::new(vec![(0.0, 1.0); dim]).expect("valid cube")
    }

    /// `[-1, 1]^d`.
    pub fn sym_box(dim: usize) -> Self {
        Self::new(vec![(-1.0, 1.0); dim]).expect("valid box")
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn side(&self, j: usize) -> f64 {
        let (lo, hi) = self.bounds[j];
        hi - lo
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|&(lo, hi)| hi - lo).product()
    }

    pub fn diameter(&self) -> f64 {
        self.bounds
            .iter()
            .map(|&(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.bounds).all(|(&xi, &(lo, hi))| {
                let slack = 1e-12 * (hi - lo);
                xi >= lo - slack && xi <= hi + slack
            })
    }

    /// Affine map of coordinate `j` onto the reference interval `[-1, 1]`.
    pub fn to_reference(&self, j: usize, x: f64) -> f64 {
        let (lo, hi) = self.bounds[j];
        (2.0 * x - lo - hi) / (hi - lo)
    }

    /// Map from the reference interval back to axis `j`.
    pub fn from_reference(&self, j: usize, t: f64) -> f64 {
        let (lo, hi) = self.bounds[j];
        0.5 * ((hi - lo) * t + lo + hi)
    }

    /// Derivative scale `d t / d x` on axis `j`.
    pub fn reference_scale(&self, j: usize) -> f64 {
        2.0 / self.side(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn total_degree_sizes() {
        assert_eq!(IndexSet::total_degree(3, 2).len(), 10);
        assert_eq!(IndexSet::total_degree(0, 5).len(), 1);
        assert_eq!(
            IndexSet::total_degree(0, 5).get(0),
            &MultiIndex::new(vec![0, 0, 0, 0, 0])
        );
        assert_eq!(IndexSet::total_degree(2, 3).len(), 10);
    }

    #[test]
    fn graded_lex_order() {
        let set = IndexSet::total_degree(2, 2);
        let expected: Vec<Vec<u32>> = vec![
            vec![0, 0],
            vec![0, 1],
            vec![1, 0],
            vec![0, 2],
            vec![1, 1],
            vec![2, 0],
        ];
        let got: Vec<Vec<u32>> = set.iter().map(|ix| ix.entries().to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn explicit_rejects_duplicates() {
        let err = IndexSet::explicit(
            vec![MultiIndex::new(vec![1, 0]), MultiIndex::new(vec![1, 0])],
            1,
        );
        assert!(matches!(err, Err(SpaceError::DuplicateIndex)));
    }

    #[test]
    fn domain_checks() {
        assert!(Domain::new(vec![(0.0, 0.0)]).is_err());
        let d = Domain::sym_box(2);
        assert!(d.contains(&[0.5, -1.0]));
        assert!(!d.contains(&[1.5, 0.0]));
        assert!((d.volume() - 4.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn hierarchy_is_prefix(level in 0usize..6, dim in 1usize..4) {
            let a = IndexSet::total_degree(level, dim);
            let b = IndexSet::total_degree(level + 1, dim);
            prop_assert!(a.len() < b.len());
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert_eq!(x, y);
            }
        }

        #[test]
        fn total_degree_matches_binomial(level in 0usize..8, dim in 1usize..4) {
            let set = IndexSet::total_degree(level, dim);
            prop_assert_eq!(set.len(), binomial(level + dim, dim));
            // sorted strictly ascending in graded-lex order
            for w in set.indices.windows(2) {
                prop_assert_eq!(w[0].graded_lex_cmp(&w[1]), std::cmp::Ordering::Less);
            }
        }
    }
}
