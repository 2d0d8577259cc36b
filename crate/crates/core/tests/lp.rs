use lipfree_core::lp::{
    self, max_slack, solve, solve_with, verify_outcome, LinearProgram, Relation, Route,
    SlackOutcome, SolveOptions, Status,
};
use lipfree_core::{ratio, Rational, Scalar};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

#[test]
fn single_upper_bound() {
    let mut p = LinearProgram::new(1);
    p.set_objective(&[(0, q(1))]);
    p.add_le(vec![(0, q(1))], q(1));
    let out = solve(&p).unwrap();
    assert_eq!(out.status, Status::Optimal);
    assert_eq!(out.value, Some(q(1)));
    assert_eq!(out.primal, Some(vec![q(1)]));
    verify_outcome(&p, &out).unwrap();
}

#[test]
fn contradictory_rows_give_unit_farkas_sum() {
    let mut p = LinearProgram::new(1);
    p.set_objective(&[(0, q(1))]);
    p.add_le(vec![(0, q(1))], q(1));
    p.add_le(vec![(0, q(-1))], q(-2));
    for route in [Route::Primal, Route::Dual] {
        let out = solve_with(
            &p,
            &SolveOptions {
                route,
                trace: false,
            },
        )
        .unwrap();
        assert_eq!(out.status, Status::Infeasible);
        let mu = out.farkas.clone().unwrap();
        // by substitution: both weights equal, so the rows sum to 0 <= -1 up to scale
        assert!(mu[0].is_positive());
        assert_eq!(mu[0], mu[1]);
        let rhs = mu[0].clone() * q(1) + mu[1].clone() * q(-2);
        assert!(rhs.is_negative());
        verify_outcome(&p, &out).unwrap();
    }
}

#[test]
fn unbounded_program_returns_improving_ray() {
    let mut p = LinearProgram::new(2);
    p.set_objective(&[(0, q(1)), (1, q(1))]);
    p.add_le(vec![(0, q(1)), (1, q(-1))], q(3));
    p.set_lower(0, q(0));
    p.set_lower(1, q(0));
    let out = solve(&p).unwrap();
    assert_eq!(out.status, Status::Unbounded);
    verify_outcome(&p, &out).unwrap();
}

#[test]
fn equality_rows_and_free_variables() {
    // max x - y  s.t.  x + y = 2, x - 2y <= 1, y <= 4
    let mut p = LinearProgram::new(2);
    p.set_objective(&[(0, q(1)), (1, q(-1))]);
    p.add_eq(vec![(0, q(1)), (1, q(1))], q(2));
    p.add_le(vec![(0, q(1)), (1, q(-2))], q(1));
    p.set_upper(1, q(4));
    for route in [Route::Primal, Route::Dual, Route::Auto] {
        let out = solve_with(
            &p,
            &SolveOptions {
                route,
                trace: false,
            },
        )
        .unwrap();
        assert_eq!(out.status, Status::Optimal);
        // x = 5/3, y = 1/3
        assert_eq!(out.value, Some(ratio(4, 3)));
        verify_outcome(&p, &out).unwrap();
    }
}

#[test]
fn ge_rows_and_shifted_lower_bounds() {
    // min x + y (as max of the negation) with x >= 2, x + y >= 3, y >= -1
    let mut p = LinearProgram::new(2);
    p.set_objective(&[(0, q(-1)), (1, q(-1))]);
    p.set_lower(0, q(2));
    p.set_lower(1, q(-1));
    p.add_ge(vec![(0, q(1)), (1, q(1))], q(3));
    let out = solve(&p).unwrap();
    assert_eq!(out.value, Some(q(-3)));
    verify_outcome(&p, &out).unwrap();
}

#[test]
fn trace_is_recorded_on_request() {
    let mut p = LinearProgram::new(2);
    p.set_objective(&[(0, q(1)), (1, q(2))]);
    p.add_le(vec![(0, q(1)), (1, q(1))], q(4));
    p.set_lower(0, q(0));
    p.set_lower(1, q(0));
    let quiet = solve(&p).unwrap();
    assert!(quiet.trace.is_empty());
    let loud = solve_with(
        &p,
        &SolveOptions {
            route: Route::Primal,
            trace: true,
        },
    )
    .unwrap();
    assert!(!loud.trace.is_empty());
    assert!(loud.trace[0].starts_with("pivot row"));
    assert_eq!(loud.value, quiet.value);
}

#[test]
fn malformed_programs_are_rejected() {
    let mut p: LinearProgram<Rational> = LinearProgram::new(1);
    p.add_le(vec![(3, q(1))], q(1));
    assert!(solve(&p).is_err());
    let mut p: LinearProgram<Rational> = LinearProgram::new(1);
    p.add_eq(vec![(0, q(1))], q(1));
    assert!(matches!(
        max_slack(&p, &[0]),
        Err(lp::LpError::StrictEquality(0))
    ));
    assert!(matches!(
        max_slack(&p, &[5]),
        Err(lp::LpError::StrictOutOfRange(5))
    ));
}

#[test]
fn slack_of_open_interval_is_half() {
    // 0 < x < 1 with both rows strict
    let mut p = LinearProgram::new(1);
    p.add_le(vec![(0, q(1))], q(1));
    p.add_le(vec![(0, q(-1))], q(0));
    match max_slack(&p, &[0, 1]).unwrap() {
        SlackOutcome::Feasible { slack, point } => {
            assert_eq!(slack, ratio(1, 2));
            assert_eq!(point, vec![ratio(1, 2)]);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn slack_with_closed_sign_bound_reaches_cap() {
    // x < 1 strict, x >= 0 as a plain bound: only one row is tightened
    let mut p = LinearProgram::new(1);
    p.add_le(vec![(0, q(1))], q(1));
    p.set_lower(0, q(0));
    match max_slack(&p, &[0]).unwrap() {
        SlackOutcome::Feasible { slack, point } => {
            assert_eq!(slack, q(lp::SLACK_CAP));
            assert_eq!(point, vec![q(0)]);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn contradictory_strict_rows_have_no_positive_slack() {
    let mut p = LinearProgram::new(1);
    p.add_le(vec![(0, q(1))], q(0));
    p.add_le(vec![(0, q(-1))], q(0));
    let out = max_slack(&p, &[0, 1]).unwrap();
    assert!(!out.strictly_feasible());
    if let SlackOutcome::Feasible { slack, .. } = out {
        assert!(slack <= q(0));
    }
}

#[test]
fn slack_reports_infeasible_closed_system() {
    let mut p = LinearProgram::new(1);
    p.add_le(vec![(0, q(1))], q(0));
    p.add_le(vec![(0, q(-1))], q(-1));
    p.add_le(vec![(0, q(1))], q(5));
    match max_slack(&p, &[2]).unwrap() {
        SlackOutcome::Infeasible { farkas } => {
            assert_eq!(farkas.len(), 3);
            assert!(farkas[2].is_zero());
            assert_eq!(farkas[0], farkas[1]);
            assert!(farkas[0].is_positive());
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn audit_counts_solves() {
    lp::audit::enable();
    let before = lp::audit::tally();
    let mut p = LinearProgram::new(1);
    p.set_objective(&[(0, q(1))]);
    p.add_le(vec![(0, q(1))], q(1));
    solve(&p).unwrap();
    let after = lp::audit::tally();
    assert!(after.solved > before.solved);
    assert!(after.certified > before.certified);
}

/// Brute force: every choice of `n` tight rows (bounds included) whose
/// system is nonsingular gives a candidate vertex; keep the feasible ones.
fn vertex_enumeration(p: &LinearProgram<Rational>) -> Option<Rational> {
    let n = p.num_vars();
    let mut rows: Vec<(Vec<Rational>, Rational, bool)> = Vec::new();
    for c in &p.constraints {
        let mut a = vec![q(0); n];
        for (j, v) in &c.terms {
            a[*j] += v;
        }
        rows.push((a, c.rhs.clone(), c.relation == Relation::Eq));
    }
    for (j, b) in p.bounds.iter().enumerate() {
        if let Some(l) = &b.lower {
            let mut a = vec![q(0); n];
            a[j] = q(-1);
            rows.push((a, -l.clone(), false));
        }
        if let Some(u) = &b.upper {
            let mut a = vec![q(0); n];
            a[j] = q(1);
            rows.push((a, u.clone(), false));
        }
    }
    let feasible = |x: &[Rational]| {
        rows.iter().all(|(a, b, eq)| {
            let lhs: Rational = a.iter().zip(x).map(|(u, v)| u * v).sum();
            if *eq {
                lhs == *b
            } else {
                lhs <= *b
            }
        })
    };
    let mut best: Option<Rational> = None;
    let mut pick = Vec::new();
    choose(rows.len(), n, 0, &mut pick, &mut |idx| {
        let a: Vec<Vec<Rational>> = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<Rational> = idx.iter().map(|&i| rows[i].1.clone()).collect();
        if let Some(x) = gauss(a, b) {
            if feasible(&x) {
                let v: Rational = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            }
        }
    });
    best
}

fn choose(len: usize, k: usize, start: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in start..len {
        pick.push(i);
        choose(len, k, i + 1, pick, f);
        pick.pop();
    }
}

fn gauss(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone() / a[col][col].clone();
                for c in col..n {
                    let t = f.clone() * a[col][c].clone();
                    a[r][c] -= t;
                }
                let t = f * b[col].clone();
                b[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| b[i].clone() / a[i][i].clone()).collect())
}

prop_compose! {
    fn boxed_lp(max_vars: usize, max_rows: usize)
        (n in 1..=max_vars, m in 0..=max_rows)
        (obj in prop::collection::vec(-5i64..=5, n),
         rows in prop::collection::vec((prop::collection::vec(-4i64..=4, n), -6i64..=8, any::<bool>()), m),
         lo in prop::collection::vec(-3i64..=0, n),
         hi in prop::collection::vec(1i64..=4, n))
        -> LinearProgram<Rational>
    {
        let n = obj.len();
        let mut p = LinearProgram::new(n);
        p.set_objective(&obj.iter().enumerate().map(|(j, c)| (j, q(*c))).collect::<Vec<_>>());
        for (coeffs, rhs, eq) in rows {
            let terms: Vec<_> = coeffs.iter().enumerate().map(|(j, c)| (j, q(*c))).collect();
            if eq {
                p.add_eq(terms, q(rhs));
            } else {
                p.add_le(terms, q(rhs));
            }
        }
        for j in 0..n {
            p.set_lower(j, q(lo[j]));
            p.set_upper(j, q(hi[j]));
        }
        p
    }
}

prop_compose! {
    fn open_lp(max_vars: usize, max_rows: usize)
        (n in 1..=max_vars, m in 1..=max_rows)
        (obj in prop::collection::vec(-3i64..=3, n),
         rows in prop::collection::vec((prop::collection::vec(-3i64..=3, n), -4i64..=4), m),
         signs in prop::collection::vec(any::<bool>(), n))
        -> LinearProgram<Rational>
    {
        let n = obj.len();
        let mut p = LinearProgram::new(n);
        p.set_objective(&obj.iter().enumerate().map(|(j, c)| (j, q(*c))).collect::<Vec<_>>());
        for (coeffs, rhs) in rows {
            p.add_le(coeffs.iter().enumerate().map(|(j, c)| (j, q(*c))).collect(), q(rhs));
        }
        for (j, s) in signs.iter().enumerate() {
            if *s {
                p.set_lower(j, q(0));
            }
        }
        p
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn optimum_matches_vertex_enumeration(p in boxed_lp(4, 5)) {
        let oracle = vertex_enumeration(&p);
        for route in [Route::Primal, Route::Dual] {
            let out = solve_with(&p, &SolveOptions { route, trace: false }).unwrap();
            verify_outcome(&p, &out).unwrap();
            match &oracle {
                Some(v) => {
                    prop_assert_eq!(out.status, Status::Optimal);
                    prop_assert_eq!(out.value.as_ref(), Some(v));
                }
                None => prop_assert_eq!(out.status, Status::Infeasible),
            }
        }
    }

    #[test]
    fn float_mode_agrees_within_tolerance(p in boxed_lp(4, 5)) {
        let exact = solve(&p).unwrap();
        let pf: LinearProgram<f64> = p.convert();
        let approx = solve(&pf).unwrap();
        verify_outcome(&pf, &approx).unwrap();
        prop_assert_eq!(exact.status, approx.status);
        if let (Some(a), Some(b)) = (exact.value, approx.value) {
            prop_assert!((a.to_f64() - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn every_status_is_certified(p in open_lp(4, 6)) {
        let primal = solve_with(&p, &SolveOptions { route: Route::Primal, trace: false }).unwrap();
        let dual = solve_with(&p, &SolveOptions { route: Route::Dual, trace: false }).unwrap();
        verify_outcome(&p, &primal).unwrap();
        verify_outcome(&p, &dual).unwrap();
        prop_assert_eq!(primal.status, dual.status);
        prop_assert_eq!(primal.value, dual.value);
    }

    #[test]
    fn solving_is_deterministic(p in open_lp(3, 5)) {
        prop_assert_eq!(solve(&p).unwrap(), solve(&p).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn six_variable_programs_match_vertex_enumeration(p in boxed_lp(6, 2)) {
        let out = solve(&p).unwrap();
        verify_outcome(&p, &out).unwrap();
        prop_assert_eq!(out.value, vertex_enumeration(&p));
    }
}
