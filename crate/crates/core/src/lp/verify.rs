use alloc::vec::Vec;

use thiserror::Error;

use super::{Constraint, LPOutcome, LinearProgram, Relation, Status};
use crate::scalar::Scalar;

/// Why an outcome failed independent re-checking.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("outcome is missing its {0}")]
    Missing(&'static str),
    #[error("{what} has length {got}, expected {expected}")]
    Length {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("point violates row {0}")]
    RowViolated(usize),
    #[error("point violates the sign constraint on variable {0}")]
    SignViolated(usize),
    #[error("multiplier on inequality row {0} is negative")]
    NegativeMultiplier(usize),
    #[error("reduced cost of variable {0} has the wrong sign")]
    DualInfeasible(usize),
    #[error("reported value does not match the objective at the point")]
    ValueMismatch,
    #[error("primal and dual objectives differ")]
    DualityGap,
    #[error("row {0} is slack but carries a positive multiplier")]
    ComplementarySlackness(usize),
    #[error("Farkas combination does not cancel on variable {0}")]
    FarkasColumn(usize),
    #[error("Farkas combination has a nonnegative right-hand side")]
    FarkasRhs,
    #[error("ray leaves the feasible cone at row {0}")]
    RayRow(usize),
    #[error("ray violates the sign constraint on variable {0}")]
    RaySign(usize),
    #[error("ray does not improve the objective")]
    RayNotImproving,
}

struct Checker<'a, S> {
    rows: Vec<Constraint<S>>,
    nonneg: Vec<bool>,
    lp: &'a LinearProgram<S>,
}

fn magnitude<S: Scalar>(vals: impl Iterator<Item = S>) -> S {
    vals.fold(S::one(), |acc, v| acc + v.abs_val())
}

/// `a <= b` up to the scalar tolerance scaled by `scale`.
fn le_scaled<S: Scalar>(a: &S, b: &S, scale: &S) -> bool {
    a.clone() - b.clone() <= S::tolerance() * scale.clone()
}

impl<S: Scalar> Checker<'_, S> {
    fn row_scale(&self, row: &Constraint<S>, x: &[S]) -> S {
        magnitude(
            row.terms
                .iter()
                .map(|(j, a)| a.clone() * x[*j].clone())
                .chain(core::iter::once(row.rhs.clone())),
        )
    }

    fn check_point(&self, x: &[S]) -> Result<(), CertificateError> {
        expect_len("primal point", x.len(), self.nonneg.len())?;
        for (j, v) in x.iter().enumerate() {
            if self.nonneg[j] && !le_scaled(&S::zero(), v, &S::one()) {
                return Err(CertificateError::SignViolated(j));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            let lhs = row.lhs(x);
            let scale = self.row_scale(row, x);
            let ok = match row.relation {
                Relation::Le => le_scaled(&lhs, &row.rhs, &scale),
                Relation::Eq => {
                    le_scaled(&lhs, &row.rhs, &scale) && le_scaled(&row.rhs, &lhs, &scale)
                }
            };
            if !ok {
                return Err(CertificateError::RowViolated(r));
            }
        }
        Ok(())
    }

    fn check_multipliers(&self, y: &[S], what: &'static str) -> Result<(), CertificateError> {
        expect_len(what, y.len(), self.rows.len())?;
        for (r, row) in self.rows.iter().enumerate() {
            if row.relation == Relation::Le && !le_scaled(&S::zero(), &y[r], &S::one()) {
                return Err(CertificateError::NegativeMultiplier(r));
            }
        }
        Ok(())
    }

    /// `Σ_r y_r A_r`, with the magnitude of its terms per column.
    fn combine(&self, y: &[S]) -> (Vec<S>, Vec<S>) {
        let n = self.nonneg.len();
        let mut col = alloc::vec![S::zero(); n];
        let mut mag = alloc::vec![S::one(); n];
        for (r, row) in self.rows.iter().enumerate() {
            if y[r].is_zero() {
                continue;
            }
            for (j, a) in &row.terms {
                let p = y[r].clone() * a.clone();
                mag[*j] += &p.abs_val();
                col[*j] += &p;
            }
        }
        (col, mag)
    }

    fn optimal(&self, out: &LPOutcome<S>) -> Result<(), CertificateError> {
        let x = out
            .primal
            .as_ref()
            .ok_or(CertificateError::Missing("primal point"))?;
        let y = out
            .duals
            .as_ref()
            .ok_or(CertificateError::Missing("duals"))?;
        let value = out
            .value
            .as_ref()
            .ok_or(CertificateError::Missing("value"))?;
        self.check_point(x)?;
        self.check_multipliers(y, "duals")?;
        let (col, mag) = self.combine(y);
        for j in 0..self.nonneg.len() {
            let reduced = self.lp.objective[j].clone() - col[j].clone();
            let scale = mag[j].clone() + self.lp.objective[j].abs_val();
            let ok = le_scaled(&reduced, &S::zero(), &scale)
                && (self.nonneg[j] || le_scaled(&S::zero(), &reduced, &scale));
            if !ok {
                return Err(CertificateError::DualInfeasible(j));
            }
        }
        let primal_obj = self.lp.objective_value(x);
        let obj_scale = magnitude(
            self.lp
                .objective
                .iter()
                .zip(x)
                .map(|(c, v)| c.clone() * v.clone()),
        );
        if !close(&primal_obj, value, &obj_scale) {
            return Err(CertificateError::ValueMismatch);
        }
        let dual_obj = y
            .iter()
            .zip(&self.rows)
            .fold(S::zero(), |acc, (m, r)| acc + m.clone() * r.rhs.clone());
        let dual_scale = magnitude(
            y.iter()
                .zip(&self.rows)
                .map(|(m, r)| m.clone() * r.rhs.clone()),
        );
        if !close(&dual_obj, value, &(dual_scale + obj_scale)) {
            return Err(CertificateError::DualityGap);
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.relation != Relation::Le {
                continue;
            }
            let gap = row.rhs.clone() - row.lhs(x);
            let prod = gap * y[r].clone();
            let scale = self.row_scale(row, x) * (S::one() + y[r].abs_val());
            if !le_scaled(&prod, &S::zero(), &scale) {
                return Err(CertificateError::ComplementarySlackness(r));
            }
        }
        Ok(())
    }

    fn infeasible(&self, out: &LPOutcome<S>) -> Result<(), CertificateError> {
        let mu = out
            .farkas
            .as_ref()
            .ok_or(CertificateError::Missing("Farkas certificate"))?;
        self.check_multipliers(mu, "Farkas certificate")?;
        let (col, mag) = self.combine(mu);
        for j in 0..self.nonneg.len() {
            let ok = le_scaled(&S::zero(), &col[j], &mag[j])
                && (self.nonneg[j] || le_scaled(&col[j], &S::zero(), &mag[j]));
            if !ok {
                return Err(CertificateError::FarkasColumn(j));
            }
        }
        let rhs = mu
            .iter()
            .zip(&self.rows)
            .fold(S::zero(), |acc, (m, r)| acc + m.clone() * r.rhs.clone());
        let scale = magnitude(
            mu.iter()
                .zip(&self.rows)
                .map(|(m, r)| m.clone() * r.rhs.clone()),
        );
        if le_scaled(&S::zero(), &rhs, &scale) {
            return Err(CertificateError::FarkasRhs);
        }
        Ok(())
    }

    fn unbounded(&self, out: &LPOutcome<S>) -> Result<(), CertificateError> {
        let x = out
            .primal
            .as_ref()
            .ok_or(CertificateError::Missing("primal point"))?;
        let d = out.ray.as_ref().ok_or(CertificateError::Missing("ray"))?;
        self.check_point(x)?;
        expect_len("ray", d.len(), self.nonneg.len())?;
        for (j, v) in d.iter().enumerate() {
            if self.nonneg[j] && !le_scaled(&S::zero(), v, &S::one()) {
                return Err(CertificateError::RaySign(j));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            let ad = row.lhs(d);
            let scale = magnitude(row.terms.iter().map(|(j, a)| a.clone() * d[*j].clone()));
            let ok = le_scaled(&ad, &S::zero(), &scale)
                && (row.relation == Relation::Le || le_scaled(&S::zero(), &ad, &scale));
            if !ok {
                return Err(CertificateError::RayRow(r));
            }
        }
        let gain = self.lp.objective_value(d);
        let scale = magnitude(
            self.lp
                .objective
                .iter()
                .zip(d)
                .map(|(c, v)| c.clone() * v.clone()),
        );
        if le_scaled(&gain, &S::zero(), &scale) {
            return Err(CertificateError::RayNotImproving);
        }
        Ok(())
    }
}

fn close<S: Scalar>(a: &S, b: &S, scale: &S) -> bool {
    le_scaled(a, b, scale) && le_scaled(b, a, scale)
}

fn expect_len(what: &'static str, got: usize, expected: usize) -> Result<(), CertificateError> {
    if got == expected {
        Ok(())
    } else {
        Err(CertificateError::Length {
            what,
            got,
            expected,
        })
    }
}

/// Re-checks an outcome against the program using only its certificates:
/// primal and dual feasibility plus a zero gap for optima, a Farkas
/// combination for infeasibility, and a feasible point with an improving
/// ray for unboundedness.
pub fn verify_outcome<S: Scalar>(
    lp: &LinearProgram<S>,
    out: &LPOutcome<S>,
) -> Result<(), CertificateError> {
    let checker = Checker {
        rows: lp.expanded_rows(),
        nonneg: (0..lp.num_vars()).map(|j| lp.is_nonneg(j)).collect(),
        lp,
    };
    match out.status {
        Status::Optimal => checker.optimal(out),
        Status::Infeasible => checker.infeasible(out),
        Status::Unbounded => checker.unbounded(out),
    }
}
