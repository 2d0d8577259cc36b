//! Lipschitz functions vanishing at the base point, their norm and
//! de Leeuw transform, and the two extension constructions used to build
//! near-norming functions off a small subset.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::free::{FreeError, FreeVector};
use crate::metric::{MetricSpace, SubsetMask};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LipError {
    #[error("function has {got} values, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("function does not vanish at the base point {0}")]
    NonZeroBase(usize),
    #[error(transparent)]
    Free(#[from] FreeError),
    #[error("the subset contains the base point")]
    BaseInSubset,
    #[error("u and v must be distinct points of the subset")]
    BadEndpoints,
    #[error("delta must lie in [0, 1]")]
    DeltaOutOfRange,
    #[error("norm bound 1 - delta fails on the pair ({x}, {y})")]
    NormTooLarge { x: usize, y: usize },
    #[error("extension inequality fails for x = {x}, y = {y}")]
    ExtensionInequality { x: usize, y: usize },
    #[error("no functions given")]
    EmptyFunctionList,
    #[error(
        "r0 + s0 < (1 - delta) d(u, v): r0 attained at ({x}, {y}, h{i}), s0 at ({z}, {w}, h{j})"
    )]
    SplitTooSmall {
        x: usize,
        y: usize,
        i: usize,
        z: usize,
        w: usize,
        j: usize,
    },
}

/// Point values of a function with `f(base) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipFunction<S = Rational> {
    values: Vec<S>,
}

impl<S: Scalar> LipFunction<S> {
    pub fn new(space: &MetricSpace<S>, values: Vec<S>) -> Result<Self, LipError> {
        if values.len() != space.len() {
            return Err(LipError::Length {
                got: values.len(),
                expected: space.len(),
            });
        }
        if !values[space.base()].is_zero() {
            return Err(LipError::NonZeroBase(space.base()));
        }
        Ok(Self { values })
    }

    pub(crate) fn from_values_unchecked(values: Vec<S>) -> Self {
        Self { values }
    }

    pub fn zero(space: &MetricSpace<S>) -> Self {
        Self {
            values: vec![S::zero(); space.len()],
        }
    }

    /// `t ↦ d(t, x) − d(base, x)`.
    pub fn distance_to(space: &MetricSpace<S>, x: usize) -> Self {
        let shift = space.d(space.base(), x).clone();
        Self {
            values: (0..space.len())
                .map(|t| space.d(t, x).clone() - shift.clone())
                .collect(),
        }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &S {
        &self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: &S) -> Self {
        Self {
            values: self.values.iter().map(|v| v.clone() * c.clone()).collect(),
        }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, other: &Self, c: &S) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.clone() + b.clone() * c.clone())
                .collect(),
        }
    }

    pub fn convert<T: Scalar>(&self) -> LipFunction<T> {
        LipFunction {
            values: crate::scalar::convert_vec(&self.values),
        }
    }

    fn check(&self, space: &MetricSpace<S>) -> Result<(), LipError> {
        if self.values.len() != space.len() {
            return Err(LipError::Length {
                got: self.values.len(),
                expected: space.len(),
            });
        }
        if !self.values[space.base()].is_zero() {
            return Err(LipError::NonZeroBase(space.base()));
        }
        Ok(())
    }
}

/// Slopes `(f(x) − f(y)) / d(x, y)` over all ordered pairs, stored densely
/// with zeros on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DeLeeuwTable<S = Rational> {
    n: usize,
    slopes: Vec<S>,
}

impl<S: Scalar> DeLeeuwTable<S> {
    pub fn get(&self, x: usize, y: usize) -> &S {
        &self.slopes[x * self.n + y]
    }

    /// Ordered off-diagonal pairs with their slopes.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &S)> + '_ {
        let n = self.n;
        self.slopes
            .iter()
            .enumerate()
            .filter(move |(k, _)| k / n != k % n)
            .map(move |(k, v)| ((k / n, k % n), v))
    }

    pub fn sup_abs(&self) -> S {
        self.slopes
            .iter()
            .fold(S::zero(), |acc, v| acc.max_of(v.abs_val()))
    }
}

pub fn de_leeuw<S: Scalar>(
    space: &MetricSpace<S>,
    f: &LipFunction<S>,
) -> Result<DeLeeuwTable<S>, LipError> {
    f.check(space)?;
    let n = space.len();
    let mut slopes = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            slopes.push(if x == y {
                S::zero()
            } else {
                (f.values[x].clone() - f.values[y].clone()) / space.d(x, y).clone()
            });
        }
    }
    Ok(DeLeeuwTable { n, slopes })
}

/// Largest slope over all pairs, with a pair attaining it (`None` for the
/// zero function).
pub fn lip_norm_with_pair<S: Scalar>(
    space: &MetricSpace<S>,
    f: &LipFunction<S>,
) -> Result<(S, Option<(usize, usize)>), LipError> {
    f.check(space)?;
    let mut best = S::zero();
    let mut at = None;
    for x in 0..space.len() {
        for y in 0..space.len() {
            if x == y {
                continue;
            }
            let s = (f.values[x].clone() - f.values[y].clone()) / space.d(x, y).clone();
            if s > best {
                best = s;
                at = Some((x, y));
            }
        }
    }
    Ok((best, at))
}

pub fn lip_norm<S: Scalar>(space: &MetricSpace<S>, f: &LipFunction<S>) -> Result<S, LipError> {
    lip_norm_with_pair(space, f).map(|(v, _)| v)
}

/// `Σ mu(x) f(x)`.
pub fn eval_functional<S: Scalar>(
    space: &MetricSpace<S>,
    mu: &FreeVector<S>,
    f: &LipFunction<S>,
) -> Result<S, LipError> {
    f.check(space)?;
    mu.check_space(space)?;
    Ok(mu.iter().fold(S::zero(), |acc, (i, c)| {
        acc + c.clone() * f.values[i].clone()
    }))
}

fn check_subset<S: Scalar>(
    space: &MetricSpace<S>,
    a: &SubsetMask,
    u: usize,
    v: usize,
    delta: &S,
) -> Result<(), LipError> {
    if a.len() != space.len() {
        return Err(LipError::Length {
            got: a.len(),
            expected: space.len(),
        });
    }
    if a.contains(space.base()) {
        return Err(LipError::BaseInSubset);
    }
    if u == v || u >= space.len() || v >= space.len() || !a.contains(u) || !a.contains(v) {
        return Err(LipError::BadEndpoints);
    }
    if delta.is_neg() || (delta.clone() - S::one()).is_pos() {
        return Err(LipError::DeltaOutOfRange);
    }
    Ok(())
}

/// Checks `|h(x) − h(y)| <= (1 − delta) d(x, y)` for `x, y` outside `A`.
fn check_outer_norm<S: Scalar>(
    space: &MetricSpace<S>,
    outside: &[usize],
    h: &LipFunction<S>,
    delta: &S,
) -> Result<(), LipError> {
    let cap = S::one() - delta.clone();
    for &x in outside {
        for &y in outside {
            if x != y {
                let diff = h.values[x].clone() - h.values[y].clone();
                if !diff.le_tol(&(cap.clone() * space.d(x, y).clone())) {
                    return Err(LipError::NormTooLarge { x, y });
                }
            }
        }
    }
    Ok(())
}

/// Extends `h` from `M∖A` to all of `M`: the infimal extension at `u`, then
/// the supremal extension over `(M∖A) ∪ {u}` on the rest of `A`. The
/// result has norm at most one and `f(u) − f(v) >= (1 − delta) d(u, v)`
/// provided
/// `h(y) − h(x) + (1 − delta) d(u, v) <= d(x, u) + d(y, v)` for all
/// `x, y ∈ M∖A`; the first violating pair is reported otherwise.
pub fn extend_fltp<S: Scalar>(
    space: &MetricSpace<S>,
    a: &SubsetMask,
    u: usize,
    v: usize,
    h: &LipFunction<S>,
    delta: &S,
) -> Result<LipFunction<S>, LipError> {
    h.check(space)?;
    check_subset(space, a, u, v, delta)?;
    let outside: Vec<usize> = a.complement().members().collect();
    check_outer_norm(space, &outside, h, delta)?;
    let target = (S::one() - delta.clone()) * space.d(u, v).clone();
    for &x in &outside {
        for &y in &outside {
            let lhs = h.values[y].clone() - h.values[x].clone() + target.clone();
            let rhs = space.d(x, u).clone() + space.d(y, v).clone();
            if !lhs.le_tol(&rhs) {
                return Err(LipError::ExtensionInequality { x, y });
            }
        }
    }
    let mut f = h.values.clone();
    f[u] = outside
        .iter()
        .map(|&x| h.values[x].clone() + space.d(x, u).clone())
        .reduce(|p, q| p.min_of(q))
        .expect("the base point lies outside the subset");
    let sources: Vec<usize> = outside.iter().copied().chain([u]).collect();
    for y in a.members().filter(|&y| y != u) {
        f[y] = sources
            .iter()
            .map(|&x| f[x].clone() - space.d(x, y).clone())
            .reduce(|p, q| p.max_of(q))
            .expect("sources are nonempty");
    }
    Ok(LipFunction { values: f })
}

/// Result of splitting `(1 − delta) d(u, v)` between the two endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct RsSplit<S = Rational> {
    pub r0: S,
    pub s0: S,
    pub r: S,
    pub s: S,
}

/// `½ min (d(x,c) + d(y,c) − (h_i(x) − h_i(y)))` over `x, y` outside `A`
/// and all `i`, with its minimizer.
fn half_min_gap<S: Scalar>(
    space: &MetricSpace<S>,
    outside: &[usize],
    hs: &[LipFunction<S>],
    c: usize,
) -> (S, (usize, usize, usize)) {
    let mut best: Option<(S, (usize, usize, usize))> = None;
    for (i, h) in hs.iter().enumerate() {
        for &x in outside {
            for &y in outside {
                let gap = space.d(x, c).clone() + space.d(y, c).clone()
                    - (h.values[x].clone() - h.values[y].clone());
                if best.as_ref().is_none_or(|(b, _)| gap < *b) {
                    best = Some((gap, (x, y, i)));
                }
            }
        }
    }
    let (gap, at) = best.expect("nonempty function list and outside set");
    (gap / S::from_int(2), at)
}

/// Computes `r0`, `s0` and a split `r + s = (1 − delta) d(u, v)` with
/// `r = min(r0, (1 − delta) d(u, v))`.
pub fn rs_split<S: Scalar>(
    space: &MetricSpace<S>,
    a: &SubsetMask,
    u: usize,
    v: usize,
    hs: &[LipFunction<S>],
    delta: &S,
) -> Result<RsSplit<S>, LipError> {
    if hs.is_empty() {
        return Err(LipError::EmptyFunctionList);
    }
    check_subset(space, a, u, v, delta)?;
    let all: Vec<usize> = (0..space.len()).collect();
    for h in hs {
        h.check(space)?;
        check_outer_norm(space, &all, h, delta)?;
    }
    let outside: Vec<usize> = a.complement().members().collect();
    let (r0, (x, y, i)) = half_min_gap(space, &outside, hs, u);
    let (s0, (z, w, j)) = half_min_gap(space, &outside, hs, v);
    let target = (S::one() - delta.clone()) * space.d(u, v).clone();
    if !target.le_tol(&(r0.clone() + s0.clone())) {
        return Err(LipError::SplitTooSmall { x, y, i, z, w, j });
    }
    let r = r0.clone().min_of(target.clone());
    let s = target - r.clone();
    Ok(RsSplit { r0, s0, r, s })
}
