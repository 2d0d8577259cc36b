use alloc::vec::Vec;

use super::{solve, LinearProgram, LpError, Relation, Status};
use crate::scalar::Scalar;

/// Upper cap on the common slack, which keeps the auxiliary program bounded.
pub const SLACK_CAP: i64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum SlackOutcome<S> {
    /// The largest `t <= SLACK_CAP` such that every strict row holds with
    /// margin `t`, together with a point attaining it. The strict system is
    /// feasible exactly when `slack > 0`.
    Feasible { slack: S, point: Vec<S> },
    /// Even the closed system is infeasible. The certificate is indexed by
    /// the expanded rows of the original program.
    Infeasible { farkas: Vec<S> },
}

impl<S: Scalar> SlackOutcome<S> {
    pub fn strictly_feasible(&self) -> bool {
        matches!(self, SlackOutcome::Feasible { slack, .. } if slack.is_pos())
    }
}

/// Maximizes the common margin `t` by which the rows listed in `strict`
/// (indices into `lp.constraints`, all `<=`) can be satisfied, ignoring the
/// program's own objective.
pub fn max_slack<S: Scalar>(
    lp: &LinearProgram<S>,
    strict: &[usize],
) -> Result<SlackOutcome<S>, LpError> {
    lp.check()?;
    for &i in strict {
        match lp.constraints.get(i) {
            None => return Err(LpError::StrictOutOfRange(i)),
            Some(c) if c.relation != Relation::Le => return Err(LpError::StrictEquality(i)),
            Some(_) => {}
        }
    }
    let mut aux = lp.clone();
    let t = aux.add_var();
    for &i in strict {
        let row = &mut aux.constraints[i];
        if !row.terms.iter().any(|(j, _)| *j == t) {
            row.terms.push((t, S::one()));
        }
    }
    let cap_row = aux.constraints.len();
    aux.add_le(alloc::vec![(t, S::one())], S::from_int(SLACK_CAP));
    aux.set_objective(&[(t, S::one())]);
    let out = solve(&aux)?;
    match out.status {
        Status::Optimal => {
            let mut point = out
                .primal
                .ok_or_else(|| LpError::Internal("optimal outcome without a point".into()))?;
            let slack = point.pop().unwrap_or_else(S::zero);
            Ok(SlackOutcome::Feasible { slack, point })
        }
        Status::Infeasible => {
            let mut farkas = out.farkas.ok_or_else(|| {
                LpError::Internal("infeasible outcome without a certificate".into())
            })?;
            // the `t` column forces zero weight on strict rows and the cap
            farkas.remove(cap_row);
            Ok(SlackOutcome::Infeasible { farkas })
        }
        Status::Unbounded => Err(LpError::Internal(
            "capped slack program is unbounded".into(),
        )),
    }
}
