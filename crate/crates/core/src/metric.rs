//! Finite pointed metric spaces, validation, point subsets and the
//! generators for the three example families.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::scalar::{Rational, Scalar};

/// Structural problems with a metric-space description. These are reported
/// separately from metric-axiom violations, which go in a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("distance matrix has {rows} rows but there are {labels} labels")]
    RowCount { rows: usize, labels: usize },
    #[error("row {row} of the distance matrix has length {len}, expected {expected}")]
    RowLength {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("a metric space needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("base index {base} out of range for {points} points")]
    BaseOutOfRange { base: usize, points: usize },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("generator parameter out of range: {0}")]
    Parameter(String),
}

/// One violated metric axiom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonZeroDiagonal {
        i: usize,
    },
    Asymmetric {
        i: usize,
        j: usize,
    },
    NonPositive {
        i: usize,
        j: usize,
    },
    /// `d(i, k) > d(i, j) + d(j, k)`.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A finite pointed metric space: labelled points, a base point and a full
/// distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace<S = Rational> {
    labels: Vec<String>,
    base: usize,
    dist: Vec<Vec<S>>,
}

impl<S: Scalar> MetricSpace<S> {
    /// Builds a space after checking its shape. Metric axioms are not
    /// checked here; call [`MetricSpace::validate`] for that.
    pub fn from_parts(
        labels: Vec<String>,
        base: usize,
        dist: Vec<Vec<S>>,
    ) -> Result<Self, StructureError> {
        let n = labels.len();
        if dist.len() != n {
            return Err(StructureError::RowCount {
                rows: dist.len(),
                labels: n,
            });
        }
        if let Some((row, r)) = dist.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(StructureError::RowLength {
                row,
                len: r.len(),
                expected: n,
            });
        }
        if n < 2 {
            return Err(StructureError::TooFewPoints(n));
        }
        if base >= n {
            return Err(StructureError::BaseOutOfRange { base, points: n });
        }
        for i in 0..n {
            if labels[..i].contains(&labels[i]) {
                return Err(StructureError::DuplicateLabel(labels[i].clone()));
            }
        }
        Ok(Self { labels, base, dist })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Looks up a label, failing with [`StructureError::UnknownLabel`].
    pub fn require(&self, label: &str) -> Result<usize, StructureError> {
        self.index_of(label)
            .ok_or_else(|| StructureError::UnknownLabel(String::from(label)))
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> &S {
        &self.dist[i][j]
    }

    pub fn distances(&self) -> &[Vec<S>] {
        &self.dist
    }

    /// Same points and base, every distance multiplied by `c`.
    pub fn scaled(&self, c: &S) -> Self {
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(|d| d.clone() * c.clone()).collect())
            .collect();
        Self {
            labels: self.labels.clone(),
            base: self.base,
            dist,
        }
    }

    /// Same space with a different base point.
    pub fn with_base(&self, base: usize) -> Result<Self, StructureError> {
        Self::from_parts(self.labels.clone(), base, self.dist.clone())
    }

    pub fn convert<T: Scalar>(&self) -> MetricSpace<T> {
        MetricSpace {
            labels: self.labels.clone(),
            base: self.base,
            dist: self
                .dist
                .iter()
                .map(|r| crate::scalar::convert_vec(r))
                .collect(),
        }
    }

    /// Lists every violated metric axiom. Triangle violations are reported
    /// once per unordered outer pair `i < k`.
    pub fn validate(&self) -> ValidationReport {
        let n = self.len();
        let mut violations = Vec::new();
        for i in 0..n {
            if !self.dist[i][i].is_negligible() {
                violations.push(Violation::NonZeroDiagonal { i });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if !(self.dist[i][j].clone() - self.dist[j][i].clone()).is_negligible() {
                    violations.push(Violation::Asymmetric { i, j });
                }
                if !self.dist[i][j].is_pos() || !self.dist[j][i].is_pos() {
                    violations.push(Violation::NonPositive { i, j });
                }
            }
        }
        for i in 0..n {
            for k in (i + 1)..n {
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let via = self.dist[i][j].clone() + self.dist[j][k].clone();
                    if !self.dist[i][k].le_tol(&via) {
                        violations.push(Violation::Triangle { i, j, k });
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    /// All ordered pairs `(x, y)`, `x != y`, in lexicographic order.
    pub fn off_diagonal(&self) -> PairSet {
        let n = self.len();
        let mut pairs = Vec::with_capacity(n * (n - 1));
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    pairs.push((x, y));
                }
            }
        }
        PairSet { pairs }
    }

    /// Whether the Lipschitz condition on `(x, y)` is implied by the
    /// conditions on shorter pairs, i.e. some third point lies metrically
    /// between `x` and `y`.
    pub fn is_redundant_pair(&self, x: usize, y: usize) -> bool {
        let dxy = &self.dist[x][y];
        (0..self.len()).any(|z| {
            z != x && z != y && {
                let via = self.dist[x][z].clone() + self.dist[z][y].clone();
                via.le_tol(dxy)
            }
        })
    }

    /// Unordered pairs `x < y` that no third point lies between. A function
    /// is `L`-Lipschitz iff it is `L`-Lipschitz on these pairs.
    pub fn essential_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for x in 0..n {
            for y in (x + 1)..n {
                if !self.is_redundant_pair(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }
}

/// A set of ordered off-diagonal pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairSet {
    pairs: Vec<(usize, usize)>,
}

impl PairSet {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: (usize, usize)) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }
}

/// Membership mask over the points of a space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask(Vec<bool>);

impl SubsetMask {
    pub fn empty(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut m = Self::empty(n);
        for &i in indices {
            m.0[i] = true;
        }
        m
    }

    /// Bit `i` of `bits` decides membership of point `i`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Self((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn from_labels<S: Scalar>(
        space: &MetricSpace<S>,
        labels: &[&str],
    ) -> Result<Self, StructureError> {
        let idx = labels
            .iter()
            .map(|l| space.require(l))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_indices(space.len(), &idx))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i] = true;
    }

    pub fn remove(&mut self, i: usize) {
        self.0[i] = false;
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i)
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| !b).collect())
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| !(a & b))
    }
}

/// `Γ_A`: ordered pairs `(x, y)`, `x != y`, with `x ∈ A` or `y ∈ A`.
pub fn gamma<S: Scalar>(space: &MetricSpace<S>, a: &SubsetMask) -> PairSet {
    let pairs = space
        .off_diagonal()
        .pairs
        .into_iter()
        .filter(|&(x, y)| a.contains(x) || a.contains(y))
        .collect();
    PairSet { pairs }
}

fn int_matrix<S: Scalar>(n: usize, f: impl Fn(usize, usize) -> i64) -> Vec<Vec<S>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        S::zero()
                    } else {
                        S::from_int(f(i, j))
                    }
                })
                .collect()
        })
        .collect()
}

/// Index layout of the three-column family `{a_k, b_k, c_k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Example31Layout {
    pub size: usize,
}

impl Example31Layout {
    /// Point indices are interleaved `a_1, b_1, c_1, a_2, ...`; `k` is 1-based.
    pub fn a(&self, k: usize) -> usize {
        3 * (k - 1)
    }
    pub fn b(&self, k: usize) -> usize {
        3 * (k - 1) + 1
    }
    pub fn c(&self, k: usize) -> usize {
        3 * (k - 1) + 2
    }
    /// `(column, level)` with column 0 = a, 1 = b, 2 = c and 1-based level.
    pub fn decode(&self, i: usize) -> (usize, usize) {
        (i % 3, i / 3 + 1)
    }
}

/// The space `{a_k, b_k, c_k : k <= K}` with `d(a_k, c_k) = 2`,
/// `d(a_k, b_l) = d(b_k, b_l) = d(c_k, b_l) = 2` for `k < l` and all other
/// distances 1. The base point is `b_1`.
pub fn gen_example31<S: Scalar>(size: usize) -> Result<MetricSpace<S>, StructureError> {
    if size == 0 {
        return Err(StructureError::Parameter(String::from(
            "example 3.1 needs K >= 1",
        )));
    }
    let lay = Example31Layout { size };
    let n = 3 * size;
    let labels = (0..n)
        .map(|i| {
            let (col, k) = lay.decode(i);
            format!("{}{}", ["a", "b", "c"][col], k)
        })
        .collect();
    let dist = int_matrix(n, |i, j| {
        let (ci, ki) = lay.decode(i);
        let (cj, kj) = lay.decode(j);
        let far = (ki == kj && ci != 1 && cj != 1) || (cj == 1 && ki < kj) || (ci == 1 && kj < ki);
        if far {
            2
        } else {
            1
        }
    });
    MetricSpace::from_parts(labels, lay.b(1), dist)
}

/// Index layout of `{a_1, a_2, b_k, c_k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Example32Layout {
    pub size: usize,
}

impl Example32Layout {
    pub fn a(&self, i: usize) -> usize {
        debug_assert!(i == 1 || i == 2);
        i - 1
    }
    /// Points `b_1..b_K` follow `a_1, a_2`.
    pub fn b(&self, k: usize) -> usize {
        1 + k
    }
    /// Points `c_1..c_K` follow the `b` block.
    pub fn c(&self, k: usize) -> usize {
        1 + self.size + k
    }
}

/// The space `{a_1, a_2, b_k, c_k : k <= K}` with
/// `d(a_1, b_{2k-1}) = d(a_2, b_{2k}) = d(c_k, b_l) = 1` for `k <= l` and
/// distance 2 otherwise. The base point is `c_1`.
pub fn gen_example32<S: Scalar>(size: usize) -> Result<MetricSpace<S>, StructureError> {
    if size < 2 {
        return Err(StructureError::Parameter(String::from(
            "example 3.2 needs K >= 2",
        )));
    }
    let lay = Example32Layout { size };
    let n = 2 + 2 * size;
    let mut labels = vec![String::from("a1"), String::from("a2")];
    labels.extend((1..=size).map(|k| format!("b{k}")));
    labels.extend((1..=size).map(|k| format!("c{k}")));
    // kind: 0 = a, 1 = b, 2 = c, with 1-based index
    let kind = |i: usize| -> (u8, usize) {
        if i < 2 {
            (0, i + 1)
        } else if i < 2 + size {
            (1, i - 1)
        } else {
            (2, i - 1 - size)
        }
    };
    let near = |p: (u8, usize), q: (u8, usize)| -> bool {
        match (p, q) {
            ((0, a), (1, l)) => (a == 1 && l % 2 == 1) || (a == 2 && l % 2 == 0),
            ((2, k), (1, l)) => k <= l,
            _ => false,
        }
    };
    let dist = int_matrix(n, |i, j| {
        let (p, q) = (kind(i), kind(j));
        if near(p, q) || near(q, p) {
            1
        } else {
            2
        }
    });
    MetricSpace::from_parts(labels, lay.c(1), dist)
}

/// Points of `ℓ_1` together with the metric space they span.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Points<S = Rational> {
    pub space: MetricSpace<S>,
    /// Coordinates of every point, all of the same length.
    pub coords: Vec<Vec<S>>,
}

impl<S: Scalar> L1Points<S> {
    /// Builds the space with `ℓ_1` distances between the given vectors.
    pub fn from_vectors(
        labels: Vec<String>,
        coords: Vec<Vec<S>>,
        base: usize,
    ) -> Result<Self, StructureError> {
        let n = coords.len();
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| l1_distance(&coords[i], &coords[j]))
                    .collect()
            })
            .collect();
        let space = MetricSpace::from_parts(labels, base, dist)?;
        Ok(Self { space, coords })
    }

    pub fn norm(&self, i: usize) -> S {
        self.coords[i]
            .iter()
            .fold(S::zero(), |acc, c| acc + c.abs_val())
    }
}

pub fn l1_distance<S: Scalar>(x: &[S], y: &[S]) -> S {
    let len = x.len().max(y.len());
    (0..len).fold(S::zero(), |acc, k| {
        let a = x.get(k).cloned().unwrap_or_else(S::zero);
        let b = y.get(k).cloned().unwrap_or_else(S::zero);
        acc + (a - b).abs_val()
    })
}

/// `{e_i + e_j : 1 <= i <= j <= n}` in `ℓ_1^n`, optionally without the
/// diagonal `2 e_i`, optionally with the zero vector added as the base point.
/// Without the zero vector the base is the first listed point.
pub fn gen_l1_pairs<S: Scalar>(
    n: usize,
    include_base: bool,
    include_diagonal: bool,
) -> Result<L1Points<S>, StructureError> {
    if n < 2 {
        return Err(StructureError::Parameter(String::from(
            "l1 pair family needs n >= 2",
        )));
    }
    let mut labels = Vec::new();
    let mut coords = Vec::new();
    if include_base {
        labels.push(String::from("0"));
        coords.push(vec![S::zero(); n]);
    }
    for i in 0..n {
        for j in i..n {
            if i == j && !include_diagonal {
                continue;
            }
            let mut v = vec![S::zero(); n];
            v[i] += &S::one();
            v[j] += &S::one();
            labels.push(format!("e{}+e{}", i + 1, j + 1));
            coords.push(v);
        }
    }
    L1Points::from_vectors(labels, coords, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn three_point(dab: i64, dbc: i64, dac: i64) -> MetricSpace {
        MetricSpace::from_parts(
            vec!["a".into(), "b".into(), "c".into()],
            0,
            vec![
                vec![q(0), q(dab), q(dac)],
                vec![q(dab), q(0), q(dbc)],
                vec![q(dac), q(dbc), q(0)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_point_space_is_valid() {
        let m = MetricSpace::from_parts(
            vec!["0".into(), "x".into()],
            0,
            vec![vec![q(0), q(1)], vec![q(1), q(0)]],
        )
        .unwrap();
        assert!(m.validate().is_valid());
    }

    #[test]
    fn single_triangle_violation() {
        let m = three_point(1, 1, 5);
        assert_eq!(
            m.validate().violations,
            vec![Violation::Triangle { i: 0, j: 1, k: 2 }]
        );
    }

    #[test]
    fn structural_errors_are_distinct() {
        let err = MetricSpace::<Rational>::from_parts(
            vec!["a".into(), "b".into()],
            0,
            vec![vec![q(0), q(1)]],
        )
        .unwrap_err();
        assert_eq!(err, StructureError::RowCount { rows: 1, labels: 2 });
        let err = MetricSpace::<Rational>::from_parts(
            vec!["a".into(), "a".into()],
            0,
            vec![vec![q(0), q(1)], vec![q(1), q(0)]],
        )
        .unwrap_err();
        assert_eq!(err, StructureError::DuplicateLabel("a".into()));
        let err =
            MetricSpace::<Rational>::from_parts(vec!["a".into()], 0, vec![vec![q(0)]]).unwrap_err();
        assert_eq!(err, StructureError::TooFewPoints(1));
    }

    #[test]
    fn other_violations_reported() {
        let m = MetricSpace::from_parts(
            vec!["a".into(), "b".into()],
            0,
            vec![vec![q(1), q(0)], vec![q(2), q(0)]],
        )
        .unwrap();
        let v = m.validate().violations;
        assert!(v.contains(&Violation::NonZeroDiagonal { i: 0 }));
        assert!(v.contains(&Violation::Asymmetric { i: 0, j: 1 }));
        assert!(v.contains(&Violation::NonPositive { i: 0, j: 1 }));
    }

    #[test]
    fn gamma_edge_cases() {
        let m = three_point(1, 1, 2);
        assert!(gamma(&m, &SubsetMask::empty(3)).is_empty());
        assert_eq!(gamma(&m, &SubsetMask::full(3)).len(), 6);
        // enumerate the six ordered pairs and keep those touching point 1
        let expected: Vec<_> = m
            .off_diagonal()
            .pairs()
            .iter()
            .copied()
            .filter(|&(x, y)| x == 1 || y == 1)
            .collect();
        let got = gamma(&m, &SubsetMask::from_indices(3, &[1]));
        assert_eq!(got.pairs(), &expected[..]);
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn example31_distances() {
        let m = gen_example31::<Rational>(2).unwrap();
        let l = Example31Layout { size: 2 };
        assert_eq!(m.d(l.a(1), l.c(1)), &q(2));
        assert_eq!(m.d(l.a(1), l.b(2)), &q(2));
        assert_eq!(m.d(l.a(1), l.b(1)), &q(1));
        assert_eq!(m.d(l.b(1), l.b(2)), &q(2));
        assert_eq!(m.d(l.c(1), l.b(2)), &q(2));
        assert_eq!(m.d(l.a(2), l.b(1)), &q(1));
        assert_eq!(m.d(l.a(1), l.a(2)), &q(1));
        assert_eq!(m.base(), l.b(1));
        assert_eq!(m.label(m.base()), "b1");

        let m1 = gen_example31::<Rational>(1).unwrap();
        assert_eq!(m1.len(), 3);
        assert_eq!(m1.d(0, 2), &q(2));
        assert_eq!(m1.d(0, 1), &q(1));
        assert_eq!(m1.d(2, 1), &q(1));

        assert!(gen_example31::<Rational>(3).unwrap().validate().is_valid());
        assert!(gen_example31::<Rational>(0).is_err());
    }

    #[test]
    fn example32_distances() {
        let m = gen_example32::<Rational>(2).unwrap();
        let l = Example32Layout { size: 2 };
        assert_eq!(m.d(l.a(1), l.b(1)), &q(1));
        assert_eq!(m.d(l.a(1), l.b(2)), &q(2));
        assert_eq!(m.d(l.a(2), l.b(2)), &q(1));
        assert_eq!(m.d(l.c(1), l.b(2)), &q(1));
        assert_eq!(m.d(l.c(2), l.b(1)), &q(2));
        assert_eq!(m.d(l.a(1), l.a(2)), &q(2));
        assert_eq!(m.d(l.c(1), l.c(2)), &q(2));
        assert_eq!(m.label(m.base()), "c1");
        assert!(gen_example32::<Rational>(4).unwrap().validate().is_valid());
        assert!(gen_example32::<Rational>(1).is_err());
    }

    #[test]
    fn l1_pair_family() {
        let p = gen_l1_pairs::<Rational>(2, false, true).unwrap();
        let m = &p.space;
        let e11 = m.require("e1+e1").unwrap();
        let e12 = m.require("e1+e2").unwrap();
        let e22 = m.require("e2+e2").unwrap();
        assert_eq!(m.d(e11, e12), &q(2));
        assert_eq!(m.d(e11, e22), &q(4));

        let p = gen_l1_pairs::<Rational>(3, true, true).unwrap();
        let z = p.space.require("0").unwrap();
        assert_eq!(p.space.base(), z);
        assert_eq!(p.space.d(z, p.space.require("e1+e2").unwrap()), &q(2));
        assert_eq!(p.norm(p.space.require("e2+e3").unwrap()), q(2));

        let p = gen_l1_pairs::<Rational>(4, false, true).unwrap();
        assert_eq!(p.space.len(), 10);
        assert!(p.space.validate().is_valid());
        let p = gen_l1_pairs::<Rational>(4, true, true).unwrap();
        assert_eq!(p.space.len(), 11);

        let p = gen_l1_pairs::<Rational>(4, false, false).unwrap();
        assert_eq!(p.space.len(), 6);
        assert!(gen_l1_pairs::<Rational>(1, true, true).is_err());
    }

    #[test]
    fn scaling_and_essential_pairs() {
        let m = gen_example31::<Rational>(2).unwrap();
        let s = m.scaled(&ratio(3, 2));
        assert_eq!(s.d(0, 2), &q(3));
        // a_k c_k has midpoint b_k
        assert!(m.is_redundant_pair(0, 2));
        let ess = m.essential_pairs();
        assert!(ess.contains(&(0, 1)));
        assert!(!ess.contains(&(0, 2)));
    }
}
