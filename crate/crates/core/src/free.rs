//! Finitely supported elements of the free space: molecules, averages,
//! and the norm computed either as a linear program over the Lipschitz
//! unit ball or as a minimum-cost transport of mass.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::flow;
use crate::lip::LipFunction;
use crate::lp::{self, LinearProgram, LpError, Status};
use crate::metric::MetricSpace;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FreeError {
    #[error("point index {index} out of range for {len} points")]
    OutOfRange { index: usize, len: usize },
    #[error("a molecule needs two distinct points, got {0} twice")]
    SamePoint(usize),
    #[error("cannot average an empty list of molecules")]
    EmptyPairs,
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("vector lives on {got} points but the space has {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("norm program ended {0:?}")]
    UnexpectedStatus(Status),
}

/// `Σ coeff_x δ_x` with the base coefficient dropped, since `δ_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeVector<S = Rational> {
    len: usize,
    coeffs: BTreeMap<usize, S>,
}

#[allow(clippy::len_without_is_empty)]
impl<S: Scalar> FreeVector<S> {
    pub fn zero(space: &MetricSpace<S>) -> Self {
        Self {
            len: space.len(),
            coeffs: BTreeMap::new(),
        }
    }

    /// Sums repeated indices and drops zeros and the base coefficient.
    pub fn from_coeffs(
        space: &MetricSpace<S>,
        coeffs: impl IntoIterator<Item = (usize, S)>,
    ) -> Result<Self, FreeError> {
        let mut out = Self::zero(space);
        for (i, c) in coeffs {
            if i >= space.len() {
                return Err(FreeError::OutOfRange {
                    index: i,
                    len: space.len(),
                });
            }
            if i != space.base() {
                *out.coeffs.entry(i).or_insert_with(S::zero) += &c;
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn delta(space: &MetricSpace<S>, x: usize) -> Result<Self, FreeError> {
        Self::from_coeffs(space, [(x, S::one())])
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| !c.is_zero());
    }

    /// Number of points of the ambient space.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: usize) -> S {
        self.coeffs.get(&i).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &S)> + '_ {
        self.coeffs.iter().map(|(i, c)| (*i, c))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn scaled(&self, c: &S) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v *= c;
        }
        out.prune();
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, FreeError> {
        self.same_len(other)?;
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            *out.coeffs.entry(*i).or_insert_with(S::zero) += c;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FreeError> {
        self.add(&other.scaled(&-S::one()))
    }

    fn same_len(&self, other: &Self) -> Result<(), FreeError> {
        if self.len == other.len {
            Ok(())
        } else {
            Err(FreeError::LengthMismatch {
                got: other.len,
                expected: self.len,
            })
        }
    }

    pub(crate) fn check_space(&self, space: &MetricSpace<S>) -> Result<(), FreeError> {
        if self.len == space.len() {
            Ok(())
        } else {
            Err(FreeError::LengthMismatch {
                got: self.len,
                expected: space.len(),
            })
        }
    }

    pub fn convert<T: Scalar>(&self) -> FreeVector<T> {
        FreeVector {
            len: self.len,
            coeffs: self
                .coeffs
                .iter()
                .map(|(i, c)| (*i, T::from_rational(&c.to_rational())))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }
}

/// `(δ_x − δ_y) / d(x, y)`.
pub fn molecule<S: Scalar>(
    space: &MetricSpace<S>,
    x: usize,
    y: usize,
) -> Result<FreeVector<S>, FreeError> {
    for i in [x, y] {
        if i >= space.len() {
            return Err(FreeError::OutOfRange {
                index: i,
                len: space.len(),
            });
        }
    }
    if x == y {
        return Err(FreeError::SamePoint(x));
    }
    let w = S::one() / space.d(x, y).clone();
    FreeVector::from_coeffs(space, [(x, w.clone()), (y, -w)])
}

/// Uniform average of the molecules of `pairs`.
pub fn average_molecules<S: Scalar>(
    space: &MetricSpace<S>,
    pairs: &[(usize, usize)],
) -> Result<FreeVector<S>, FreeError> {
    if pairs.is_empty() {
        return Err(FreeError::EmptyPairs);
    }
    let mut sum = FreeVector::zero(space);
    for &(x, y) in pairs {
        sum = sum.add(&molecule(space, x, y)?)?;
    }
    let n = i64::try_from(pairs.len()).expect("pair count fits in i64");
    Ok(sum.scaled(&(S::one() / S::from_int(n))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormMethod {
    /// Maximize the pairing over the Lipschitz unit ball.
    #[default]
    Lp,
    /// Cheapest transport of the coefficients, the base absorbing the excess.
    Flow,
}

pub fn free_norm<S: Scalar>(
    space: &MetricSpace<S>,
    mu: &FreeVector<S>,
    method: NormMethod,
) -> Result<S, FreeError> {
    match method {
        NormMethod::Lp => norming_function(space, mu).map(|(v, _)| v),
        NormMethod::Flow => {
            mu.check_space(space)?;
            Ok(flow::transport_cost(space, mu))
        }
    }
}

/// The norm together with a function of Lipschitz norm at most one on
/// which it is attained.
pub fn norming_function<S: Scalar>(
    space: &MetricSpace<S>,
    mu: &FreeVector<S>,
) -> Result<(S, LipFunction<S>), FreeError> {
    mu.check_space(space)?;
    let (prog, var_of) = unit_ball_program(space);
    let mut prog = prog;
    let obj: Vec<(usize, S)> = mu
        .iter()
        .filter_map(|(i, c)| var_of[i].map(|v| (v, c.clone())))
        .collect();
    prog.set_objective(&obj);
    let out = lp::solve(&prog)?;
    if out.status != Status::Optimal {
        return Err(FreeError::UnexpectedStatus(out.status));
    }
    let x = out.primal.unwrap_or_default();
    let values = var_of
        .iter()
        .map(|v| v.map_or_else(S::zero, |j| x[j].clone()))
        .collect();
    let f = LipFunction::from_values_unchecked(values);
    Ok((out.value.unwrap_or_else(S::zero), f))
}

/// Variables are the values at non-base points; one row per direction of
/// every essential pair.
pub(crate) fn unit_ball_program<S: Scalar>(
    space: &MetricSpace<S>,
) -> (LinearProgram<S>, Vec<Option<usize>>) {
    let mut var_of = Vec::with_capacity(space.len());
    let mut next = 0;
    for i in 0..space.len() {
        if i == space.base() {
            var_of.push(None);
        } else {
            var_of.push(Some(next));
            next += 1;
        }
    }
    let mut prog = LinearProgram::new(next);
    for (x, y) in space.essential_pairs() {
        for (p, q) in [(x, y), (y, x)] {
            let mut terms = Vec::with_capacity(2);
            if let Some(v) = var_of[p] {
                terms.push((v, S::one()));
            }
            if let Some(v) = var_of[q] {
                terms.push((v, -S::one()));
            }
            prog.add_le(terms, space.d(p, q).clone());
        }
    }
    (prog, var_of)
}

/// Rescales to norm one.
pub fn normalize<S: Scalar>(
    space: &MetricSpace<S>,
    mu: &FreeVector<S>,
) -> Result<FreeVector<S>, FreeError> {
    let n = free_norm(space, mu, NormMethod::Lp)?;
    if mu.is_zero() || !n.is_pos() {
        return Err(FreeError::ZeroVector);
    }
    Ok(mu.scaled(&(S::one() / n)))
}
