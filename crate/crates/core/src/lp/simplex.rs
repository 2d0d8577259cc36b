use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{
    audit, verify_outcome, Constraint, LPOutcome, LinearProgram, LpError, Relation, Status,
};
use crate::scalar::{Rational, Scalar};

/// Which formulation the tableau is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Dual when the program has more than twice as many rows as variables.
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub route: Route,
    /// Record a formatted tableau after every pivot.
    pub trace: bool,
}

/// Solves with default options.
pub fn solve<S: Scalar>(lp: &LinearProgram<S>) -> Result<LPOutcome<S>, LpError> {
    solve_with(lp, &SolveOptions::default())
}

pub fn solve_with<S: Scalar>(
    lp: &LinearProgram<S>,
    opts: &SolveOptions,
) -> Result<LPOutcome<S>, LpError> {
    lp.check()?;
    let mut out = dispatch(lp, opts);
    if !S::EXACT && verify_outcome(lp, &out).is_err() {
        // numerical trouble: redo the solve exactly and round the result
        let exact: LinearProgram<Rational> = lp.convert();
        out = dispatch(&exact, opts).convert();
    }
    if audit::is_enabled() {
        audit::record(verify_outcome(lp, &out).is_ok());
    }
    Ok(out)
}

fn dispatch<S: Scalar>(lp: &LinearProgram<S>, opts: &SolveOptions) -> LPOutcome<S> {
    let form = Form::from_lp(lp);
    let use_dual = match opts.route {
        Route::Primal => false,
        Route::Dual => true,
        Route::Auto => form.rows.len() > 2 * form.n.max(1),
    };
    if use_dual {
        if let Some(out) = via_dual(&form, opts.trace) {
            return out;
        }
    }
    primal_route(&form, opts.trace)
}

/// Expanded program: maximize `c·x`, rows `≤`/`=`, `x_j >= 0` where
/// `nonneg[j]`, free otherwise.
struct Form<S> {
    n: usize,
    c: Vec<S>,
    rows: Vec<Constraint<S>>,
    nonneg: Vec<bool>,
}

impl<S: Scalar> Form<S> {
    fn from_lp(lp: &LinearProgram<S>) -> Self {
        Self {
            n: lp.num_vars(),
            c: lp.objective.clone(),
            rows: lp.expanded_rows(),
            nonneg: (0..lp.num_vars()).map(|j| lp.is_nonneg(j)).collect(),
        }
    }
}

/// Solves the dual program and reads the primal answer off its multipliers.
/// Returns `None` when the dual is infeasible, in which case the primal is
/// either unbounded or infeasible and must be solved directly.
fn via_dual<S: Scalar>(form: &Form<S>, trace: bool) -> Option<LPOutcome<S>> {
    let m = form.rows.len();
    let mut cols: Vec<Vec<(usize, S)>> = vec![Vec::new(); form.n];
    for (r, row) in form.rows.iter().enumerate() {
        for (j, a) in &row.terms {
            cols[*j].push((r, a.clone()));
        }
    }
    let mut dual = LinearProgram::new(m);
    for (r, row) in form.rows.iter().enumerate() {
        if row.relation == Relation::Le {
            dual.set_lower(r, S::zero());
        }
    }
    dual.objective = form.rows.iter().map(|r| -r.rhs.clone()).collect();
    for (j, col) in cols.into_iter().enumerate() {
        if form.nonneg[j] {
            dual.add_ge(col, form.c[j].clone());
        } else {
            dual.add_eq(col, form.c[j].clone());
        }
    }
    let d = primal_route(&Form::from_lp(&dual), trace);
    match d.status {
        Status::Optimal => {
            let pi = d.duals?;
            let primal = (0..form.n)
                .map(|j| {
                    if form.nonneg[j] {
                        pi[j].clone()
                    } else {
                        -pi[j].clone()
                    }
                })
                .collect();
            Some(LPOutcome {
                status: Status::Optimal,
                value: d.value.map(|v| -v),
                primal: Some(primal),
                duals: d.primal,
                farkas: None,
                ray: None,
                trace: d.trace,
            })
        }
        Status::Unbounded => Some(LPOutcome {
            status: Status::Infeasible,
            value: None,
            primal: None,
            duals: None,
            farkas: d.ray,
            ray: None,
            trace: d.trace,
        }),
        Status::Infeasible => None,
    }
}

struct Tableau<S> {
    /// `m` rows of `ncols + 1` entries; the last entry is the right-hand side.
    t: Vec<Vec<S>>,
    /// Reduced costs; last entry is minus the objective value.
    z: Vec<S>,
    basis: Vec<usize>,
    ncols: usize,
    barred: Vec<bool>,
    trace: Option<Vec<String>>,
}

enum Pivoting {
    Optimal,
    Unbounded(usize),
}

impl<S: Scalar> Tableau<S> {
    fn rhs(&self, i: usize) -> &S {
        &self.t[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let inv = S::one() / self.t[r][e].clone();
        for v in self.t[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        // exact unit on the pivot to keep float tableaus clean
        self.t[r][e] = S::one();
        let nz: Vec<usize> = (0..=self.ncols)
            .filter(|&j| !self.t[r][j].is_zero())
            .collect();
        let (before, rest) = self.t.split_at_mut(r);
        let (prow, after) = rest.split_first_mut().expect("pivot row");
        for row in before.iter_mut().chain(after.iter_mut()) {
            eliminate(row, prow, &nz, e);
        }
        eliminate(&mut self.z, prow, &nz, e);
        self.basis[r] = e;
        if let Some(tr) = self.trace.as_mut() {
            tr.push(format_tableau(&self.t, &self.z, &self.basis, r, e));
        }
    }

    /// Bland's rule: lowest-index improving column enters; among rows tied
    /// in the ratio test the one with the lowest-index basic variable leaves.
    fn run(&mut self) -> Pivoting {
        loop {
            let Some(e) = (0..self.ncols).find(|&j| !self.barred[j] && self.z[j].is_pos()) else {
                return Pivoting::Optimal;
            };
            let mut best: Option<(usize, S)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][e];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rhs(i).clone() / a.clone();
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let diff = ratio.clone() - br.clone();
                        if diff.is_neg() || (diff.is_negligible() && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                None => return Pivoting::Unbounded(e),
                Some((r, _)) => self.pivot(r, e),
            }
        }
    }

    fn set_costs(&mut self, costs: &[S]) {
        let mut z: Vec<S> = costs.to_vec();
        z.push(S::zero());
        for (k, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (zj, tj) in z.iter_mut().zip(&self.t[k]) {
                if !tj.is_zero() {
                    let mut p = tj.clone();
                    p *= cb;
                    *zj -= &p;
                }
            }
        }
        self.z = z;
    }

    /// `c_B B⁻¹`, reading `B⁻¹` off the columns of the starting basis.
    fn row_prices(&self, costs: &[S], init_cols: &[usize]) -> Vec<S> {
        init_cols
            .iter()
            .map(|&col| {
                self.basis
                    .iter()
                    .enumerate()
                    .fold(S::zero(), |acc, (k, &b)| {
                        if costs[b].is_zero() || self.t[k][col].is_zero() {
                            acc
                        } else {
                            acc + costs[b].clone() * self.t[k][col].clone()
                        }
                    })
            })
            .collect()
    }

    fn column_values(&self) -> Vec<S> {
        let mut x = vec![S::zero(); self.ncols];
        for (k, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs(k).clone();
        }
        x
    }
}

fn eliminate<S: Scalar>(row: &mut [S], prow: &[S], nz: &[usize], e: usize) {
    if row[e].is_zero() {
        return;
    }
    let f = row[e].clone();
    for &j in nz {
        let mut p = prow[j].clone();
        p *= &f;
        row[j] -= &p;
        if !S::EXACT && row[j].is_negligible() {
            row[j] = S::zero();
        }
    }
    row[e] = S::zero();
}

fn format_tableau<S: Scalar>(t: &[Vec<S>], z: &[S], basis: &[usize], r: usize, e: usize) -> String {
    let mut s = format!("pivot row {r} col {e}\n");
    for (k, row) in t.iter().enumerate() {
        let _ = write!(s, "x{:<4}|", basis[k]);
        for v in row {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    s.push_str("z    |");
    for v in z {
        let _ = write!(s, " {v}");
    }
    s.push('\n');
    s
}

/// Two-phase primal simplex on the standard form of `form`.
fn primal_route<S: Scalar>(form: &Form<S>, trace: bool) -> LPOutcome<S> {
    let m = form.rows.len();
    // column layout: one column per variable, a second (negated) column for
    // free variables, one slack per `<=` row, artificials last
    let mut pos = Vec::with_capacity(form.n);
    let mut neg = Vec::with_capacity(form.n);
    let mut ncols = 0;
    for j in 0..form.n {
        pos.push(ncols);
        ncols += 1;
        if form.nonneg[j] {
            neg.push(None);
        } else {
            neg.push(Some(ncols));
            ncols += 1;
        }
    }
    let mut slack = vec![None; m];
    for (r, row) in form.rows.iter().enumerate() {
        if row.relation == Relation::Le {
            slack[r] = Some(ncols);
            ncols += 1;
        }
    }
    let sign: Vec<bool> = form.rows.iter().map(|r| r.rhs < S::zero()).collect();
    let mut init_cols = vec![0; m];
    let mut artificial = Vec::new();
    for r in 0..m {
        match slack[r] {
            Some(s) if !sign[r] => init_cols[r] = s,
            _ => {
                init_cols[r] = ncols;
                artificial.push(ncols);
                ncols += 1;
            }
        }
    }
    let mut t = vec![vec![S::zero(); ncols + 1]; m];
    for (r, row) in form.rows.iter().enumerate() {
        let flip = |v: S| if sign[r] { -v } else { v };
        for (j, a) in &row.terms {
            t[r][pos[*j]] = flip(a.clone());
            if let Some(nj) = neg[*j] {
                t[r][nj] = flip(-a.clone());
            }
        }
        if let Some(s) = slack[r] {
            t[r][s] = flip(S::one());
        }
        if init_cols[r] != slack[r].unwrap_or(usize::MAX) {
            t[r][init_cols[r]] = S::one();
        }
        t[r][ncols] = flip(row.rhs.clone());
    }
    let mut is_art = vec![false; ncols];
    for &a in &artificial {
        is_art[a] = true;
    }
    let mut tab = Tableau {
        t,
        z: Vec::new(),
        basis: init_cols.clone(),
        ncols,
        barred: vec![false; ncols],
        trace: trace.then(Vec::new),
    };
    let unsign = |r: usize, v: S| if sign[r] { -v } else { v };

    if !artificial.is_empty() {
        let phase1: Vec<S> = (0..ncols)
            .map(|j| if is_art[j] { -S::one() } else { S::zero() })
            .collect();
        tab.set_costs(&phase1);
        // phase one is bounded by zero, so it always ends optimal
        let _ = tab.run();
        let value = -tab.z[ncols].clone();
        if value.is_neg() {
            let y = tab.row_prices(&phase1, &init_cols);
            let farkas = y
                .into_iter()
                .enumerate()
                .map(|(r, v)| unsign(r, v))
                .collect();
            return LPOutcome {
                status: Status::Infeasible,
                value: None,
                primal: None,
                duals: None,
                farkas: Some(farkas),
                ray: None,
                trace: tab.trace.unwrap_or_default(),
            };
        }
        for r in 0..m {
            if !is_art[tab.basis[r]] {
                continue;
            }
            if let Some(j) = (0..ncols).find(|&j| !is_art[j] && !tab.t[r][j].is_negligible()) {
                tab.pivot(r, j);
            }
        }
        for &a in &artificial {
            tab.barred[a] = true;
        }
    }

    let mut costs = vec![S::zero(); ncols];
    for j in 0..form.n {
        costs[pos[j]] = form.c[j].clone();
        if let Some(nj) = neg[j] {
            costs[nj] = -form.c[j].clone();
        }
    }
    tab.set_costs(&costs);
    let result = tab.run();
    let xs = tab.column_values();
    let original = |cols: &[S]| -> Vec<S> {
        (0..form.n)
            .map(|j| {
                let mut v = cols[pos[j]].clone();
                if let Some(nj) = neg[j] {
                    v -= &cols[nj];
                }
                v
            })
            .collect()
    };
    let primal = original(&xs);
    match result {
        Pivoting::Optimal => {
            let y = tab.row_prices(&costs, &init_cols);
            let duals = y
                .into_iter()
                .enumerate()
                .map(|(r, v)| unsign(r, v))
                .collect();
            LPOutcome {
                status: Status::Optimal,
                value: Some(-tab.z[ncols].clone()),
                primal: Some(primal),
                duals: Some(duals),
                farkas: None,
                ray: None,
                trace: tab.trace.unwrap_or_default(),
            }
        }
        Pivoting::Unbounded(e) => {
            let mut dir = vec![S::zero(); ncols];
            dir[e] = S::one();
            for (k, &b) in tab.basis.iter().enumerate() {
                dir[b] = -tab.t[k][e].clone();
            }
            LPOutcome {
                status: Status::Unbounded,
                value: None,
                primal: Some(primal),
                duals: None,
                farkas: None,
                ray: Some(original(&dir)),
                trace: tab.trace.unwrap_or_default(),
            }
        }
    }
}
