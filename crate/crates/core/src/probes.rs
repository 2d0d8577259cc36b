//! Slices of the Lipschitz unit ball and linear probes over them.
//!
//! All optimization runs over closed slices `{f : ‖f‖ <= 1, F(f) >= 1 − α}`.
//! Open slices only enter through [`ProbeSystem::feasibility`], where their
//! membership rows are strict and decided with [`max_slack`].
//!
//! Diameters use the pair decomposition: the norm of `f − g` is its largest
//! slope over pairs, and for a fixed pair `(p, q)` the best `f` and `g` can
//! be chosen independently, so
//! `diam S = max_{p,q} (h(p,q) + h(q,p)) / d(p,q)` with
//! `h(p,q) = max_{f ∈ S} f(p) − f(q)`. Slopes of any function peak on pairs
//! with no point metrically between them, so only those pairs are visited.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::free::{normalize, unit_ball_program, FreeError, FreeVector};
use crate::lip::{eval_functional, lip_norm, LipError, LipFunction};
use crate::lp::{self, max_slack, LinearProgram, LpError, SlackOutcome, Status};
use crate::metric::MetricSpace;
use crate::par;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbeError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Free(#[from] FreeError),
    #[error(transparent)]
    Lip(#[from] LipError),
    #[error("slice depth must be nonnegative")]
    NegativeAlpha,
    #[error("the open slice is empty")]
    EmptySlice,
    #[error("weights must be nonnegative and sum to one")]
    Weights,
    #[error("no slices given")]
    NoSlices,
    #[error("eps must lie strictly between 0 and 1")]
    EpsOutOfRange,
    #[error("row {row} refers to unknown {what} {index}")]
    UnknownIndex {
        row: usize,
        what: &'static str,
        index: usize,
    },
    #[error("row {0} is a strict equality")]
    StrictEquality(usize),
    #[error("probe program ended {0:?}")]
    UnexpectedStatus(Status),
    #[error("witness violates row {0}")]
    Violation(usize),
}

/// `{f ∈ B : F(f) > 1 − α}`, or `>=` when `closed`.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice<S = Rational> {
    functional: FreeVector<S>,
    alpha: S,
    closed: bool,
}

impl<S: Scalar> Slice<S> {
    /// Normalizes `functional` to norm one.
    pub fn new(
        space: &MetricSpace<S>,
        functional: &FreeVector<S>,
        alpha: S,
        closed: bool,
    ) -> Result<Self, ProbeError> {
        if alpha.is_neg() {
            return Err(ProbeError::NegativeAlpha);
        }
        Ok(Self {
            functional: normalize(space, functional)?,
            alpha,
            closed,
        })
    }

    pub fn functional(&self) -> &FreeVector<S> {
        &self.functional
    }

    pub fn alpha(&self) -> &S {
        &self.alpha
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn threshold(&self) -> S {
        S::one() - self.alpha.clone()
    }

    /// Direct membership test.
    pub fn contains(&self, space: &MetricSpace<S>, f: &LipFunction<S>) -> Result<bool, ProbeError> {
        if !lip_norm(space, f)?.le_tol(&S::one()) {
            return Ok(false);
        }
        let v = eval_functional(space, &self.functional, f)?;
        Ok(if self.closed {
            self.threshold().le_tol(&v)
        } else {
            self.threshold().lt_tol(&v)
        })
    }

    pub fn convert<T: Scalar>(&self) -> Slice<T> {
        Slice {
            functional: self.functional.convert(),
            alpha: T::from_rational(&self.alpha.to_rational()),
            closed: self.closed,
        }
    }
}

/// A linear quantity in a probe: the value of an unknown function at a
/// point, or a free scalar unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Value { unknown: usize, point: usize },
    Scalar(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeRow<S = Rational> {
    /// `‖Σ c_k f_k‖ <= bound`.
    LipBall { combo: Vec<(usize, S)>, bound: S },
    /// `Σ c_k f_k` lies in the slice (strictly unless the slice is closed).
    SliceMember {
        combo: Vec<(usize, S)>,
        slice: Slice<S>,
    },
    /// `Σ a·term (cmp) rhs`.
    Linear {
        terms: Vec<(Term, S)>,
        cmp: Cmp,
        rhs: S,
        strict: bool,
    },
}

/// Unknown functions (vanishing at the base) and scalars tied by rows, with
/// an objective to maximize.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSystem<S = Rational> {
    pub functions: usize,
    pub scalars: usize,
    pub rows: Vec<ProbeRow<S>>,
    pub objective: Vec<(Term, S)>,
}

/// Values of every unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeWitness<S = Rational> {
    pub functions: Vec<LipFunction<S>>,
    pub scalars: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeOutcome<S = Rational> {
    Optimal {
        value: S,
        witness: ProbeWitness<S>,
    },
    /// Farkas weights on the compiled rows.
    Infeasible {
        farkas: Vec<S>,
    },
    Unbounded,
}

impl<S: Scalar> ProbeOutcome<S> {
    pub fn value(&self) -> Option<&S> {
        match self {
            ProbeOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<S = Rational> {
    /// Largest common margin on the strict rows (capped at
    /// [`lp::SLACK_CAP`]); strictly feasible iff positive.
    Slack {
        slack: S,
        witness: ProbeWitness<S>,
    },
    Infeasible {
        farkas: Vec<S>,
    },
}

impl<S: Scalar> Feasibility<S> {
    pub fn strictly_feasible(&self) -> bool {
        matches!(self, Feasibility::Slack { slack, .. } if slack.is_pos())
    }
}

struct Layout {
    n: usize,
    base: usize,
    functions: usize,
}

impl Layout {
    fn var(&self, unknown: usize, point: usize) -> Option<usize> {
        if point == self.base {
            None
        } else {
            let idx = if point > self.base { point - 1 } else { point };
            Some(unknown * (self.n - 1) + idx)
        }
    }

    fn scalar(&self, s: usize) -> usize {
        self.functions * (self.n - 1) + s
    }

    fn term(&self, t: &Term) -> Option<usize> {
        match *t {
            Term::Value { unknown, point } => self.var(unknown, point),
            Term::Scalar(s) => Some(self.scalar(s)),
        }
    }

    fn decode<S: Scalar>(&self, x: &[S], scalars: usize) -> ProbeWitness<S> {
        let functions = (0..self.functions)
            .map(|k| {
                LipFunction::from_values_unchecked(
                    (0..self.n)
                        .map(|p| self.var(k, p).map_or_else(S::zero, |j| x[j].clone()))
                        .collect(),
                )
            })
            .collect();
        let scalars = (0..scalars).map(|s| x[self.scalar(s)].clone()).collect();
        ProbeWitness { functions, scalars }
    }
}

struct Compiled<S> {
    lp: LinearProgram<S>,
    strict: Vec<usize>,
    layout: Layout,
}

impl<S: Scalar> ProbeSystem<S> {
    pub fn new(functions: usize, scalars: usize) -> Self {
        Self {
            functions,
            scalars,
            rows: Vec::new(),
            objective: Vec::new(),
        }
    }

    pub fn lip_ball(&mut self, combo: Vec<(usize, S)>, bound: S) -> &mut Self {
        self.rows.push(ProbeRow::LipBall { combo, bound });
        self
    }

    pub fn slice(&mut self, combo: Vec<(usize, S)>, slice: Slice<S>) -> &mut Self {
        self.rows.push(ProbeRow::SliceMember { combo, slice });
        self
    }

    pub fn linear(&mut self, terms: Vec<(Term, S)>, cmp: Cmp, rhs: S) -> &mut Self {
        self.rows.push(ProbeRow::Linear {
            terms,
            cmp,
            rhs,
            strict: false,
        });
        self
    }

    pub fn strict_linear(&mut self, terms: Vec<(Term, S)>, cmp: Cmp, rhs: S) -> &mut Self {
        self.rows.push(ProbeRow::Linear {
            terms,
            cmp,
            rhs,
            strict: true,
        });
        self
    }

    pub fn maximize(&mut self, objective: Vec<(Term, S)>) -> &mut Self {
        self.objective = objective;
        self
    }

    pub fn convert<T: Scalar>(&self) -> ProbeSystem<T> {
        let num = |v: &S| T::from_rational(&v.to_rational());
        let combo = |c: &[(usize, S)]| c.iter().map(|(k, v)| (*k, num(v))).collect();
        let terms = |t: &[(Term, S)]| t.iter().map(|(t, v)| (*t, num(v))).collect();
        ProbeSystem {
            functions: self.functions,
            scalars: self.scalars,
            rows: self
                .rows
                .iter()
                .map(|row| match row {
                    ProbeRow::LipBall { combo: c, bound } => ProbeRow::LipBall {
                        combo: combo(c),
                        bound: num(bound),
                    },
                    ProbeRow::SliceMember { combo: c, slice } => ProbeRow::SliceMember {
                        combo: combo(c),
                        slice: slice.convert(),
                    },
                    ProbeRow::Linear {
                        terms: t,
                        cmp,
                        rhs,
                        strict,
                    } => ProbeRow::Linear {
                        terms: terms(t),
                        cmp: *cmp,
                        rhs: num(rhs),
                        strict: *strict,
                    },
                })
                .collect(),
            objective: terms(&self.objective),
        }
    }

    fn check(&self, space: &MetricSpace<S>) -> Result<(), ProbeError> {
        let unknown = |row, index| ProbeError::UnknownIndex {
            row,
            what: "function",
            index,
        };
        let check_term = |row: usize, t: &Term| match *t {
            Term::Value { unknown: k, point } => {
                if k >= self.functions {
                    Err(unknown(row, k))
                } else if point >= space.len() {
                    Err(ProbeError::UnknownIndex {
                        row,
                        what: "point",
                        index: point,
                    })
                } else {
                    Ok(())
                }
            }
            Term::Scalar(s) if s >= self.scalars => Err(ProbeError::UnknownIndex {
                row,
                what: "scalar",
                index: s,
            }),
            Term::Scalar(_) => Ok(()),
        };
        for (r, row) in self.rows.iter().enumerate() {
            match row {
                ProbeRow::LipBall { combo, .. } | ProbeRow::SliceMember { combo, .. } => {
                    if let Some((k, _)) = combo.iter().find(|(k, _)| *k >= self.functions) {
                        return Err(unknown(r, *k));
                    }
                }
                ProbeRow::Linear {
                    terms, cmp, strict, ..
                } => {
                    if *strict && *cmp == Cmp::Eq {
                        return Err(ProbeError::StrictEquality(r));
                    }
                    for (t, _) in terms {
                        check_term(r, t)?;
                    }
                }
            }
        }
        for (t, _) in &self.objective {
            check_term(self.rows.len(), t)?;
        }
        Ok(())
    }

    fn compile(&self, space: &MetricSpace<S>) -> Result<Compiled<S>, ProbeError> {
        self.check(space)?;
        let layout = Layout {
            n: space.len(),
            base: space.base(),
            functions: self.functions,
        };
        let nvars = self.functions * (space.len() - 1) + self.scalars;
        let mut lp = LinearProgram::new(nvars);
        let mut strict = Vec::new();
        let pairs = space.essential_pairs();
        let combo_terms = |combo: &[(usize, S)], p: usize, c: &S| -> Vec<(usize, S)> {
            combo
                .iter()
                .filter_map(|(k, a)| layout.var(*k, p).map(|j| (j, a.clone() * c.clone())))
                .collect()
        };
        for row in &self.rows {
            match row {
                ProbeRow::LipBall { combo, bound } => {
                    for &(x, y) in &pairs {
                        for (p, q) in [(x, y), (y, x)] {
                            let mut t = combo_terms(combo, p, &S::one());
                            t.extend(combo_terms(combo, q, &-S::one()));
                            lp.add_le(t, bound.clone() * space.d(p, q).clone());
                        }
                    }
                }
                ProbeRow::SliceMember { combo, slice } => {
                    let mut t = Vec::new();
                    for (p, c) in slice.functional.iter() {
                        t.extend(combo_terms(combo, p, &-c.clone()));
                    }
                    let idx = lp.add_le(t, -slice.threshold());
                    if !slice.closed {
                        strict.push(idx);
                    }
                }
                ProbeRow::Linear {
                    terms,
                    cmp,
                    rhs,
                    strict: is_strict,
                } => {
                    let t: Vec<(usize, S)> = terms
                        .iter()
                        .filter_map(|(term, a)| layout.term(term).map(|j| (j, a.clone())))
                        .collect();
                    let idx = match cmp {
                        Cmp::Le => lp.add_le(t, rhs.clone()),
                        Cmp::Ge => lp.add_ge(t, rhs.clone()),
                        Cmp::Eq => lp.add_eq(t, rhs.clone()),
                    };
                    if *is_strict {
                        strict.push(idx);
                    }
                }
            }
        }
        let obj: Vec<(usize, S)> = self
            .objective
            .iter()
            .filter_map(|(term, a)| layout.term(term).map(|j| (j, a.clone())))
            .collect();
        lp.set_objective(&obj);
        Ok(Compiled { lp, strict, layout })
    }

    /// Maximizes the objective over the closed relaxation of the system.
    pub fn bound_probe(&self, space: &MetricSpace<S>) -> Result<ProbeOutcome<S>, ProbeError> {
        let c = self.compile(space)?;
        let out = lp::solve(&c.lp)?;
        Ok(match out.status {
            Status::Optimal => ProbeOutcome::Optimal {
                value: out.value.unwrap_or_else(S::zero),
                witness: c
                    .layout
                    .decode(&out.primal.unwrap_or_default(), self.scalars),
            },
            Status::Infeasible => ProbeOutcome::Infeasible {
                farkas: out.farkas.unwrap_or_default(),
            },
            Status::Unbounded => ProbeOutcome::Unbounded,
        })
    }

    /// Decides the system with its strict rows, ignoring the objective.
    pub fn feasibility(&self, space: &MetricSpace<S>) -> Result<Feasibility<S>, ProbeError> {
        let c = self.compile(space)?;
        Ok(match max_slack(&c.lp, &c.strict)? {
            SlackOutcome::Feasible { slack, point } => Feasibility::Slack {
                slack,
                witness: c.layout.decode(&point, self.scalars),
            },
            SlackOutcome::Infeasible { farkas } => Feasibility::Infeasible { farkas },
        })
    }

    /// Re-checks every row by direct substitution, with Lipschitz norms
    /// taken over all pairs. Strict rows are checked strictly when
    /// `honor_strict` is set and as closed rows otherwise.
    pub fn verify_witness(
        &self,
        space: &MetricSpace<S>,
        w: &ProbeWitness<S>,
        honor_strict: bool,
    ) -> Result<(), ProbeError> {
        self.check(space)?;
        let combine = |combo: &[(usize, S)]| {
            combo.iter().fold(LipFunction::zero(space), |acc, (k, c)| {
                acc.add_scaled(&w.functions[*k], c)
            })
        };
        let value = |t: &Term| match *t {
            Term::Value { unknown, point } => w.functions[unknown].value(point).clone(),
            Term::Scalar(s) => w.scalars[s].clone(),
        };
        for (r, row) in self.rows.iter().enumerate() {
            let ok = match row {
                ProbeRow::LipBall { combo, bound } => {
                    lip_norm(space, &combine(combo))?.le_tol(bound)
                }
                ProbeRow::SliceMember { combo, slice } => {
                    let v = eval_functional(space, &slice.functional, &combine(combo))?;
                    if honor_strict && !slice.closed {
                        slice.threshold().lt_tol(&v)
                    } else {
                        slice.threshold().le_tol(&v)
                    }
                }
                ProbeRow::Linear {
                    terms,
                    cmp,
                    rhs,
                    strict,
                } => {
                    let lhs = terms
                        .iter()
                        .fold(S::zero(), |acc, (t, a)| acc + a.clone() * value(t));
                    let tight = honor_strict && *strict;
                    match (cmp, tight) {
                        (Cmp::Le, false) => lhs.le_tol(rhs),
                        (Cmp::Le, true) => lhs.lt_tol(rhs),
                        (Cmp::Ge, false) => rhs.le_tol(&lhs),
                        (Cmp::Ge, true) => rhs.lt_tol(&lhs),
                        (Cmp::Eq, _) => (lhs - rhs.clone()).is_negligible(),
                    }
                }
            };
            if !ok {
                return Err(ProbeError::Violation(r));
            }
        }
        Ok(())
    }
}

/// `h(p, q) = max f(p) − f(q)` over the closed slice, for every listed
/// ordered pair.
fn directional_maxima<S: Scalar>(
    space: &MetricSpace<S>,
    slice: &Slice<S>,
    ordered: &[(usize, usize)],
) -> Result<Vec<(S, LipFunction<S>)>, ProbeError> {
    let (mut base, var_of) = unit_ball_program(space);
    let row: Vec<(usize, S)> = slice
        .functional
        .iter()
        .filter_map(|(p, c)| var_of[p].map(|j| (j, -c.clone())))
        .collect();
    base.add_le(row, -slice.threshold());
    let results = par::map(
        ordered,
        |&(p, q)| -> Result<(S, LipFunction<S>), ProbeError> {
            let mut prog = base.clone();
            let mut obj = Vec::new();
            if let Some(j) = var_of[p] {
                obj.push((j, S::one()));
            }
            if let Some(j) = var_of[q] {
                obj.push((j, -S::one()));
            }
            prog.set_objective(&obj);
            let out = lp::solve(&prog)?;
            if out.status != Status::Optimal {
                return Err(ProbeError::UnexpectedStatus(out.status));
            }
            let x = out.primal.unwrap_or_default();
            let f = LipFunction::from_values_unchecked(
                var_of
                    .iter()
                    .map(|v| v.map_or_else(S::zero, |j| x[j].clone()))
                    .collect(),
            );
            Ok((out.value.unwrap_or_else(S::zero), f))
        },
    );
    results.into_iter().collect()
}

fn check_nonempty<S: Scalar>(space: &MetricSpace<S>, slice: &Slice<S>) -> Result<(), ProbeError> {
    if slice.closed {
        return Ok(());
    }
    let mut sys = ProbeSystem::new(1, 0);
    sys.lip_ball(vec![(0, S::one())], S::one())
        .slice(vec![(0, S::one())], slice.clone());
    if sys.feasibility(space)?.strictly_feasible() {
        Ok(())
    } else {
        Err(ProbeError::EmptySlice)
    }
}

/// Diameter of a convex combination of slices with witnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct Diameter<S = Rational> {
    pub value: S,
    /// Per slice, the two members whose weighted differences realize the
    /// value.
    pub f: Vec<LipFunction<S>>,
    pub g: Vec<LipFunction<S>>,
    /// The pair on which `Σ λ_i (f_i − g_i)` has slope `value`.
    pub pair: (usize, usize),
}

pub fn slice_diameter<S: Scalar>(
    space: &MetricSpace<S>,
    slice: &Slice<S>,
) -> Result<Diameter<S>, ProbeError> {
    combo_diameter(space, &[(slice.clone(), S::one())])
}

/// `diam Σ λ_i S_i` for weights forming a convex combination.
pub fn combo_diameter<S: Scalar>(
    space: &MetricSpace<S>,
    slices: &[(Slice<S>, S)],
) -> Result<Diameter<S>, ProbeError> {
    if slices.is_empty() {
        return Err(ProbeError::NoSlices);
    }
    let total = slices.iter().fold(S::zero(), |acc, (_, w)| acc + w.clone());
    if slices.iter().any(|(_, w)| w.is_neg()) || !(total - S::one()).is_negligible() {
        return Err(ProbeError::Weights);
    }
    let pairs = space.essential_pairs();
    let ordered: Vec<(usize, usize)> = pairs.iter().flat_map(|&(p, q)| [(p, q), (q, p)]).collect();
    // distinct slices only; repeated copies share their maxima
    let mut tables: Vec<(usize, Vec<(S, LipFunction<S>)>)> = Vec::with_capacity(slices.len());
    for (i, (s, _)) in slices.iter().enumerate() {
        if let Some(j) = (0..i).find(|&j| slices[j].0 == *s) {
            let copy = tables[j].1.clone();
            tables.push((i, copy));
            continue;
        }
        check_nonempty(space, s)?;
        tables.push((i, directional_maxima(space, s, &ordered)?));
    }
    let mut best: Option<(S, usize)> = None;
    for (k, &(p, q)) in pairs.iter().enumerate() {
        let sum = slices
            .iter()
            .zip(&tables)
            .fold(S::zero(), |acc, ((_, w), (_, t))| {
                acc + w.clone() * (t[2 * k].0.clone() + t[2 * k + 1].0.clone())
            });
        let v = sum / space.d(p, q).clone();
        if best
            .as_ref()
            .is_none_or(|(b, _)| v.clone() - b.clone() > S::tolerance())
        {
            best = Some((v, k));
        }
    }
    let (value, k) = best.expect("a space with two points has an essential pair");
    Ok(Diameter {
        value,
        f: tables.iter().map(|(_, t)| t[2 * k].1.clone()).collect(),
        g: tables.iter().map(|(_, t)| t[2 * k + 1].1.clone()).collect(),
        pair: pairs[k],
    })
}

/// Functions `f_i` and `g` with `f_i ± g ∈ S_i` and `‖g‖ >= 1 − eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ssd2pWitness<S = Rational> {
    pub f: Vec<LipFunction<S>>,
    pub g: LipFunction<S>,
    /// `g(p) − g(q) >= (1 − eps) d(p, q)`.
    pub pair: (usize, usize),
    pub slack: S,
}

/// Result of trying one norming pair for `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSlack<S = Rational> {
    pub pair: (usize, usize),
    /// `None` when even the closed system is infeasible.
    pub slack: Option<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ssd2pReport<S = Rational> {
    pub witness: Option<Ssd2pWitness<S>>,
    /// Every pair examined, in order. The search stops at the first
    /// strictly feasible pair (after finishing its chunk).
    pub table: Vec<PairSlack<S>>,
}

/// The system `‖f_i ± g‖ <= 1`, `f_i ± g ∈ S_i` over unknowns
/// `f_1, …, f_n, g` (index `n` is `g`).
pub fn ssd2p_system<S: Scalar>(slices: &[Slice<S>]) -> ProbeSystem<S> {
    let n = slices.len();
    let mut sys = ProbeSystem::new(n + 1, 0);
    for (i, s) in slices.iter().enumerate() {
        for sign in [S::one(), -S::one()] {
            let combo = vec![(i, S::one()), (n, sign)];
            sys.lip_ball(combo.clone(), S::one());
            sys.slice(combo, s.clone());
        }
    }
    sys
}

/// Searches for a witness by trying each unordered pair as the norming
/// pair of `g`. Replacing `g` by `−g` maps witnesses to witnesses, so the
/// reversed pair never needs a separate run.
pub fn ssd2p_witness<S: Scalar>(
    space: &MetricSpace<S>,
    slices: &[Slice<S>],
    eps: &S,
) -> Result<Ssd2pReport<S>, ProbeError> {
    if slices.is_empty() {
        return Err(ProbeError::NoSlices);
    }
    if !eps.is_pos() || !eps.lt_tol(&S::one()) {
        return Err(ProbeError::EpsOutOfRange);
    }
    let n = slices.len();
    let base = ssd2p_system(slices);
    let pairs = space.essential_pairs();
    let mut table = Vec::new();
    for chunk in pairs.chunks(par::SEARCH_CHUNK) {
        let results = par::map(chunk, |&(p, q)| -> Result<_, ProbeError> {
            let mut sys = base.clone();
            sys.linear(
                vec![
                    (
                        Term::Value {
                            unknown: n,
                            point: p,
                        },
                        S::one(),
                    ),
                    (
                        Term::Value {
                            unknown: n,
                            point: q,
                        },
                        -S::one(),
                    ),
                ],
                Cmp::Ge,
                (S::one() - eps.clone()) * space.d(p, q).clone(),
            );
            sys.feasibility(space)
        });
        for (&pair, res) in chunk.iter().zip(results) {
            match res? {
                Feasibility::Slack { slack, witness } => {
                    let hit = slack.is_pos();
                    table.push(PairSlack {
                        pair,
                        slack: Some(slack.clone()),
                    });
                    if hit {
                        let mut fs = witness.functions;
                        let g = fs.pop().expect("g is the last unknown");
                        return Ok(Ssd2pReport {
                            witness: Some(Ssd2pWitness {
                                f: fs,
                                g,
                                pair,
                                slack,
                            }),
                            table,
                        });
                    }
                }
                Feasibility::Infeasible { .. } => table.push(PairSlack { pair, slack: None }),
            }
        }
    }
    Ok(Ssd2pReport {
        witness: None,
        table,
    })
}

/// Independent check of a witness for both `g` and `−g`: norms over all
/// pairs, slice values and `‖g‖ >= 1 − eps`, all by substitution.
pub fn verify_ssd2p<S: Scalar>(
    space: &MetricSpace<S>,
    slices: &[Slice<S>],
    eps: &S,
    w: &Ssd2pWitness<S>,
) -> Result<bool, ProbeError> {
    if w.f.len() != slices.len() {
        return Ok(false);
    }
    if !(S::one() - eps.clone()).le_tol(&lip_norm(space, &w.g)?) {
        return Ok(false);
    }
    for sign in [S::one(), -S::one()] {
        let g = w.g.scaled(&sign);
        for (f, s) in w.f.iter().zip(slices) {
            for h in [f.add_scaled(&g, &S::one()), f.add_scaled(&g, &-S::one())] {
                if !s.contains(space, &h)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
