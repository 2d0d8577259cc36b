//! Dense tableau simplex over exact rationals or floats.
//!
//! Problems are stated as *maximize `c·x`* subject to `≤` / `=` rows and
//! optional variable bounds. Every optimal outcome carries dual multipliers,
//! every infeasible outcome a Farkas combination of rows and every unbounded
//! outcome an improving ray, so results can be re-checked by
//! [`verify_outcome`] without trusting the pivoting code.
//!
//! Bland's rule is used for both entering and leaving variables, which
//! guarantees termination. Problems with many more rows than columns are
//! solved through their dual (the tableau then has one row per variable).

mod simplex;
mod slack;
mod verify;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use thiserror::Error;

use crate::scalar::Scalar;

pub use simplex::{solve, solve_with, Route, SolveOptions};
pub use slack::{max_slack, SlackOutcome, SLACK_CAP};
pub use verify::{verify_outcome, CertificateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `a·x <= b`
    Le,
    /// `a·x = b`
    Eq,
}

/// A sparse linear row `Σ coeff·x_var  (rel)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub terms: Vec<(usize, S)>,
    pub relation: Relation,
    pub rhs: S,
}

impl<S: Scalar> Constraint<S> {
    pub fn lhs(&self, x: &[S]) -> S {
        self.terms
            .iter()
            .fold(S::zero(), |acc, (j, a)| acc + a.clone() * x[*j].clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bound<S> {
    pub lower: Option<S>,
    pub upper: Option<S>,
}

impl<S> Bound<S> {
    pub const fn free() -> Self {
        Self {
            lower: None,
            upper: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("row {row} references variable {var} but the program has {vars} variables")]
    VariableOutOfRange { row: usize, var: usize, vars: usize },
    #[error("objective has length {got}, expected {expected}")]
    ObjectiveLength { got: usize, expected: usize },
    #[error("bounds have length {got}, expected {expected}")]
    BoundsLength { got: usize, expected: usize },
    #[error("strict row {0} is not a `<=` row")]
    StrictEquality(usize),
    #[error("strict row index {0} out of range")]
    StrictOutOfRange(usize),
    #[error("internal solver failure: {0}")]
    Internal(String),
}

/// `maximize objective·x` subject to `constraints` and `bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S> {
    num_vars: usize,
    pub objective: Vec<S>,
    pub constraints: Vec<Constraint<S>>,
    pub bounds: Vec<Bound<S>>,
}

impl<S: Scalar> LinearProgram<S> {
    /// All variables free, zero objective, no rows.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![S::zero(); num_vars],
            constraints: Vec::new(),
            bounds: (0..num_vars).map(|_| Bound::free()).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Appends a fresh free variable and returns its index.
    pub fn add_var(&mut self) -> usize {
        self.num_vars += 1;
        self.objective.push(S::zero());
        self.bounds.push(Bound::free());
        self.num_vars - 1
    }

    pub fn set_objective(&mut self, terms: &[(usize, S)]) {
        self.objective = vec![S::zero(); self.num_vars];
        for (j, c) in terms {
            self.objective[*j] += c;
        }
    }

    pub fn add_le(&mut self, terms: Vec<(usize, S)>, rhs: S) -> usize {
        self.push(terms, Relation::Le, rhs)
    }

    /// Stored as the negated `<=` row.
    pub fn add_ge(&mut self, terms: Vec<(usize, S)>, rhs: S) -> usize {
        let terms = terms.into_iter().map(|(j, a)| (j, -a)).collect();
        self.push(terms, Relation::Le, -rhs)
    }

    pub fn add_eq(&mut self, terms: Vec<(usize, S)>, rhs: S) -> usize {
        self.push(terms, Relation::Eq, rhs)
    }

    fn push(&mut self, terms: Vec<(usize, S)>, relation: Relation, rhs: S) -> usize {
        self.constraints.push(Constraint {
            terms: merge_terms(terms),
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_lower(&mut self, var: usize, lower: S) {
        self.bounds[var].lower = Some(lower);
    }

    pub fn set_upper(&mut self, var: usize, upper: S) {
        self.bounds[var].upper = Some(upper);
    }

    pub fn check(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars {
            return Err(LpError::ObjectiveLength {
                got: self.objective.len(),
                expected: self.num_vars,
            });
        }
        if self.bounds.len() != self.num_vars {
            return Err(LpError::BoundsLength {
                got: self.bounds.len(),
                expected: self.num_vars,
            });
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if let Some(&(var, _)) = c.terms.iter().find(|(j, _)| *j >= self.num_vars) {
                return Err(LpError::VariableOutOfRange {
                    row,
                    var,
                    vars: self.num_vars,
                });
            }
        }
        Ok(())
    }

    /// Whether variable `j` is sign-constrained (`x_j >= 0`) in the expanded
    /// form. Only a lower bound of exactly zero is kept as a sign constraint;
    /// every other bound becomes an extra row.
    pub fn is_nonneg(&self, j: usize) -> bool {
        matches!(&self.bounds[j].lower, Some(l) if l.is_zero())
    }

    /// User rows followed by one row per bound that is not a plain sign
    /// constraint. Dual multipliers and Farkas certificates are indexed by
    /// these rows.
    pub fn expanded_rows(&self) -> Vec<Constraint<S>> {
        let mut rows = self.constraints.clone();
        for (j, b) in self.bounds.iter().enumerate() {
            if let Some(l) = &b.lower {
                if !self.is_nonneg(j) {
                    rows.push(Constraint {
                        terms: vec![(j, -S::one())],
                        relation: Relation::Le,
                        rhs: -l.clone(),
                    });
                }
            }
            if let Some(u) = &b.upper {
                rows.push(Constraint {
                    terms: vec![(j, S::one())],
                    relation: Relation::Le,
                    rhs: u.clone(),
                });
            }
        }
        rows
    }

    pub fn objective_value(&self, x: &[S]) -> S {
        self.objective
            .iter()
            .zip(x)
            .fold(S::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
    }

    pub fn convert<T: Scalar>(&self) -> LinearProgram<T> {
        let cv = |s: &S| T::from_rational(&s.to_rational());
        LinearProgram {
            num_vars: self.num_vars,
            objective: self.objective.iter().map(cv).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    terms: c.terms.iter().map(|(j, a)| (*j, cv(a))).collect(),
                    relation: c.relation,
                    rhs: cv(&c.rhs),
                })
                .collect(),
            bounds: self
                .bounds
                .iter()
                .map(|b| Bound {
                    lower: b.lower.as_ref().map(cv),
                    upper: b.upper.as_ref().map(cv),
                })
                .collect(),
        }
    }
}

fn merge_terms<S: Scalar>(mut terms: Vec<(usize, S)>) -> Vec<(usize, S)> {
    terms.sort_by_key(|(j, _)| *j);
    let mut out: Vec<(usize, S)> = Vec::with_capacity(terms.len());
    for (j, a) in terms {
        match out.last_mut() {
            Some((k, b)) if *k == j => *b += &a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|(_, a)| !a.is_zero());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LPOutcome<S> {
    pub status: Status,
    /// Optimal objective value.
    pub value: Option<S>,
    /// Optimal point, or a feasible point when unbounded.
    pub primal: Option<Vec<S>>,
    /// One multiplier per expanded row (see
    /// [`LinearProgram::expanded_rows`]); nonnegative on `<=` rows.
    pub duals: Option<Vec<S>>,
    /// Nonnegative (on `<=` rows) row weights whose combination reads
    /// `0 <= negative` after accounting for sign constraints.
    pub farkas: Option<Vec<S>>,
    /// Improving direction when unbounded.
    pub ray: Option<Vec<S>>,
    /// Formatted tableaus, filled only when requested in [`SolveOptions`].
    pub trace: Vec<String>,
}

impl<S: Scalar> LPOutcome<S> {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn convert<T: Scalar>(&self) -> LPOutcome<T> {
        let cv = |v: &Vec<S>| crate::scalar::convert_vec::<S, T>(v);
        LPOutcome {
            status: self.status,
            value: self
                .value
                .as_ref()
                .map(|v| T::from_rational(&v.to_rational())),
            primal: self.primal.as_ref().map(cv),
            duals: self.duals.as_ref().map(cv),
            farkas: self.farkas.as_ref().map(cv),
            ray: self.ray.as_ref().map(cv),
            trace: self.trace.clone(),
        }
    }
}

/// Process-wide audit switch. While enabled, every outcome produced by
/// [`solve`] is re-checked with [`verify_outcome`] and tallied.
pub mod audit {
    use super::*;

    static ENABLED: AtomicBool = AtomicBool::new(false);
    static SOLVED: AtomicUsize = AtomicUsize::new(0);
    static CERTIFIED: AtomicUsize = AtomicUsize::new(0);
    static FAILED: AtomicUsize = AtomicUsize::new(0);

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct Tally {
        pub solved: usize,
        pub certified: usize,
        pub failed: usize,
    }

    pub fn enable() {
        ENABLED.store(true, Ordering::SeqCst);
    }

    pub fn disable() {
        ENABLED.store(false, Ordering::SeqCst);
    }

    pub fn is_enabled() -> bool {
        ENABLED.load(Ordering::Relaxed)
    }

    pub fn reset() {
        SOLVED.store(0, Ordering::SeqCst);
        CERTIFIED.store(0, Ordering::SeqCst);
        FAILED.store(0, Ordering::SeqCst);
    }

    pub fn tally() -> Tally {
        Tally {
            solved: SOLVED.load(Ordering::SeqCst),
            certified: CERTIFIED.load(Ordering::SeqCst),
            failed: FAILED.load(Ordering::SeqCst),
        }
    }

    pub(crate) fn record(ok: bool) {
        SOLVED.fetch_add(1, Ordering::Relaxed);
        if ok {
            CERTIFIED.fetch_add(1, Ordering::Relaxed);
        } else {
            FAILED.fetch_add(1, Ordering::Relaxed);
        }
    }
}
