mod common;

use common::{closure, metric, q};
use lipfree_core::free::{molecule, FreeVector};
use lipfree_core::lip::{eval_functional, lip_norm, LipFunction};
use lipfree_core::lp::{solve, LinearProgram, Status};
use lipfree_core::probes::{
    combo_diameter, slice_diameter, ssd2p_witness, verify_ssd2p, Cmp, Feasibility, ProbeError,
    ProbeOutcome, ProbeSystem, Slice, Ssd2pWitness, Term,
};
use lipfree_core::{ratio, MetricSpace, Rational};
use num_traits::Zero;
use proptest::prelude::*;

fn two_point(d: i64) -> MetricSpace {
    closure(2, &[d])
}

#[test]
fn two_point_slice_diameter_is_alpha() {
    let m = two_point(3);
    let mol = molecule(&m, 1, 0).unwrap();
    for alpha in [ratio(1, 10), ratio(1, 3), q(1), ratio(1, 2)] {
        for closed in [true, false] {
            let s = Slice::new(&m, &mol, alpha.clone(), closed).unwrap();
            let d = slice_diameter(&m, &s).unwrap();
            assert_eq!(d.value, alpha);
        }
    }
}

#[test]
fn empty_open_slice_is_reported() {
    let m = two_point(1);
    let s = Slice::new(&m, &molecule(&m, 1, 0).unwrap(), q(0), false).unwrap();
    assert!(matches!(
        slice_diameter(&m, &s),
        Err(ProbeError::EmptySlice)
    ));
    let closed = Slice::new(&m, &molecule(&m, 1, 0).unwrap(), q(0), true).unwrap();
    assert_eq!(slice_diameter(&m, &closed).unwrap().value, q(0));
}

#[test]
fn slice_functional_is_normalized() {
    let m = closure(3, &[1, 2, 2]);
    let mu = FreeVector::from_coeffs(&m, [(1, q(4))]).unwrap();
    let s = Slice::new(&m, &mu, ratio(1, 2), true).unwrap();
    assert_eq!(s.functional().coeff(1), q(1));
    assert!(matches!(
        Slice::new(&m, &mu, q(-1), true),
        Err(ProbeError::NegativeAlpha)
    ));
}

#[test]
fn combo_weights_are_checked() {
    let m = two_point(1);
    let s = Slice::new(&m, &molecule(&m, 1, 0).unwrap(), ratio(1, 2), true).unwrap();
    assert!(matches!(
        combo_diameter(&m, &[(s.clone(), ratio(1, 2))]),
        Err(ProbeError::Weights)
    ));
    assert!(matches!(
        combo_diameter(&m, &[(s.clone(), ratio(3, 2)), (s, ratio(-1, 2))]),
        Err(ProbeError::Weights)
    ));
    assert!(matches!(
        combo_diameter::<Rational>(&m, &[]),
        Err(ProbeError::NoSlices)
    ));
}

#[test]
fn molecule_slice_is_nonempty() {
    let m = closure(4, &[1, 2, 3, 2, 2, 1]);
    let s = Slice::new(&m, &molecule(&m, 2, 3).unwrap(), ratio(1, 10), false).unwrap();
    let mut sys = ProbeSystem::new(1, 0);
    sys.lip_ball(vec![(0, q(1))], q(1))
        .slice(vec![(0, q(1))], s);
    let res = sys.feasibility(&m).unwrap();
    assert!(res.strictly_feasible());
    if let Feasibility::Slack { witness, .. } = res {
        sys.verify_witness(&m, &witness, true).unwrap();
    }
}

#[test]
fn bound_probe_basics() {
    let m = closure(3, &[2, 3, 4]);
    let mut sys = ProbeSystem::new(1, 0);
    sys.lip_ball(vec![(0, q(1))], q(1)).maximize(vec![(
        Term::Value {
            unknown: 0,
            point: 2,
        },
        q(1),
    )]);
    match sys.bound_probe(&m).unwrap() {
        ProbeOutcome::Optimal { value, witness } => {
            assert_eq!(value, m.d(2, 0).clone());
            sys.verify_witness(&m, &witness, true).unwrap();
            let mut bad = witness.clone();
            bad.functions[0] = bad.functions[0].scaled(&q(3));
            assert!(matches!(
                sys.verify_witness(&m, &bad, true),
                Err(ProbeError::Violation(0))
            ));
        }
        other => panic!("unexpected {other:?}"),
    }
    sys.linear(
        vec![(
            Term::Value {
                unknown: 0,
                point: 1,
            },
            q(1),
        )],
        Cmp::Ge,
        q(5),
    );
    assert!(matches!(
        sys.bound_probe(&m).unwrap(),
        ProbeOutcome::Infeasible { .. }
    ));
}

#[test]
fn scalar_unknowns_bound_a_maximum() {
    // minimize t with t >= ±f(p) and f(2) - f(1) >= 3 on a path 0 - 1 - 2
    let m = closure(3, &[2, 4, 2]);
    let mut sys = ProbeSystem::new(1, 1);
    sys.lip_ball(vec![(0, q(1))], q(1));
    sys.linear(
        vec![
            (
                Term::Value {
                    unknown: 0,
                    point: 2,
                },
                q(1),
            ),
            (
                Term::Value {
                    unknown: 0,
                    point: 1,
                },
                q(-1),
            ),
        ],
        Cmp::Ge,
        q(1),
    );
    for p in 1..3 {
        for s in [q(1), q(-1)] {
            sys.linear(
                vec![
                    (Term::Scalar(0), q(1)),
                    (
                        Term::Value {
                            unknown: 0,
                            point: p,
                        },
                        -s,
                    ),
                ],
                Cmp::Ge,
                q(0),
            );
        }
    }
    sys.maximize(vec![(Term::Scalar(0), q(-1))]);
    let out = sys.bound_probe(&m).unwrap();
    // best is f(1) = -1/2... clipped by |f(1)| <= 2, f(2) = f(1) + 1
    assert_eq!(out.value(), Some(&ratio(-1, 2)));
    assert!(matches!(
        ProbeSystem::<Rational>::new(1, 0)
            .linear(vec![(Term::Scalar(0), q(1))], Cmp::Le, q(0))
            .bound_probe(&m),
        Err(ProbeError::UnknownIndex { .. })
    ));
}

#[test]
fn far_point_carries_a_witness() {
    // x = base, y at distance 1, z at distance 5 from both
    let m = closure(3, &[1, 5, 5]);
    let (x, y, z) = (0, 1, 2);
    let s = Slice::new(&m, &molecule(&m, x, y).unwrap(), ratio(1, 10), false).unwrap();
    let eps = ratio(1, 4);
    // hand-built: f = (0, -1, -1/2), g = 4 at z only
    let hand = Ssd2pWitness {
        f: vec![LipFunction::new(&m, vec![q(0), q(-1), ratio(-1, 2)]).unwrap()],
        g: LipFunction::new(&m, vec![q(0), q(0), q(4)]).unwrap(),
        pair: (z, x),
        slack: q(0),
    };
    assert!(verify_ssd2p(&m, std::slice::from_ref(&s), &eps, &hand).unwrap());
    let report = ssd2p_witness(&m, std::slice::from_ref(&s), &eps).unwrap();
    let w = report.witness.expect("witness exists");
    assert!(verify_ssd2p(&m, &[s], &eps, &w).unwrap());
    assert!(w.slack > q(0));
}

#[test]
fn two_point_space_has_no_symmetric_witness() {
    let m = two_point(1);
    let s = Slice::new(&m, &molecule(&m, 1, 0).unwrap(), ratio(1, 4), false).unwrap();
    let report = ssd2p_witness(&m, &[s], &ratio(1, 4)).unwrap();
    assert!(report.witness.is_none());
    assert_eq!(report.table.len(), 1);
    assert!(report
        .table
        .iter()
        .all(|r| r.slack.as_ref().is_none_or(|v| *v <= q(0))));
}

#[test]
fn ssd2p_rejects_bad_input() {
    let m = two_point(1);
    let s = Slice::new(&m, &molecule(&m, 1, 0).unwrap(), ratio(1, 4), false).unwrap();
    assert!(matches!(
        ssd2p_witness(&m, std::slice::from_ref(&s), &q(0)),
        Err(ProbeError::EpsOutOfRange)
    ));
    assert!(matches!(
        ssd2p_witness(&m, &[s], &q(1)),
        Err(ProbeError::EpsOutOfRange)
    ));
    assert!(matches!(
        ssd2p_witness::<Rational>(&m, &[], &ratio(1, 2)),
        Err(ProbeError::NoSlices)
    ));
}

/// One joint program per ordered pair over all ordered Lipschitz rows,
/// without the pair decomposition or the essential-pair reduction.
fn brute_diameter(m: &MetricSpace, slices: &[(Slice, Rational)]) -> Rational {
    let n = m.len();
    let k = slices.len();
    // variables: f_i(x), g_i(x) for every point, base pinned by an equality
    let var = |which: usize, i: usize, x: usize| (2 * i + which) * n + x;
    let mut best = q(0);
    for p in 0..n {
        for qq in 0..n {
            if p == qq {
                continue;
            }
            let mut lp = LinearProgram::new(2 * k * n);
            for i in 0..k {
                for which in 0..2 {
                    lp.add_eq(vec![(var(which, i, m.base()), q(1))], q(0));
                    for x in 0..n {
                        for y in 0..n {
                            if x != y {
                                lp.add_le(
                                    vec![(var(which, i, x), q(1)), (var(which, i, y), q(-1))],
                                    m.d(x, y).clone(),
                                );
                            }
                        }
                    }
                    let s = &slices[i].0;
                    let row = s
                        .functional()
                        .iter()
                        .map(|(x, c)| (var(which, i, x), -c.clone()))
                        .collect();
                    lp.add_le(row, s.alpha().clone() - q(1));
                }
            }
            let mut obj = Vec::new();
            for (i, (_, w)) in slices.iter().enumerate() {
                obj.push((var(0, i, p), w.clone()));
                obj.push((var(0, i, qq), -w.clone()));
                obj.push((var(1, i, p), -w.clone()));
                obj.push((var(1, i, qq), w.clone()));
            }
            lp.set_objective(&obj);
            let out = solve(&lp).unwrap();
            assert_eq!(out.status, Status::Optimal);
            let v = out.value.unwrap() / m.d(p, qq).clone();
            if v > best {
                best = v;
            }
        }
    }
    best
}

fn random_slice(m: &MetricSpace, coeffs: &[i64], alpha: i64) -> Option<Slice> {
    let mu = FreeVector::from_coeffs(
        m,
        coeffs.iter().enumerate().map(|(i, c)| (i % m.len(), q(*c))),
    )
    .unwrap();
    if mu.is_zero() {
        return None;
    }
    Some(Slice::new(m, &mu, ratio(alpha, 8), false).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diameter_matches_joint_programs(
        m in metric(2, 4),
        c in prop::collection::vec(-3i64..=3, 4),
        alpha in 1i64..=12,
    ) {
        let Some(s) = random_slice(&m, &c, alpha) else { return Ok(()) };
        let d = slice_diameter(&m, &s).unwrap();
        prop_assert_eq!(&d.value, &brute_diameter(&m, &[(s.clone(), q(1))]));
        prop_assert!(d.value >= q(0) && d.value <= q(2));
        // witnesses lie in the closed slice and realize the value on the pair
        let closed = Slice::new(&m, s.functional(), s.alpha().clone(), true).unwrap();
        prop_assert!(closed.contains(&m, &d.f[0]).unwrap());
        prop_assert!(closed.contains(&m, &d.g[0]).unwrap());
        let diff = d.f[0].add_scaled(&d.g[0], &q(-1));
        let (p, r) = d.pair;
        let slope = (diff.value(p).clone() - diff.value(r).clone()) / m.d(p, r).clone();
        prop_assert_eq!(slope.clone(), d.value.clone());
        prop_assert!(lip_norm(&m, &diff).unwrap() == d.value);
    }

    #[test]
    fn combo_diameter_matches_joint_programs(
        m in metric(2, 4),
        c1 in prop::collection::vec(-3i64..=3, 4),
        c2 in prop::collection::vec(-3i64..=3, 4),
        a1 in 1i64..=12,
        a2 in 1i64..=12,
        w in 0i64..=4,
    ) {
        let (Some(s1), Some(s2)) = (random_slice(&m, &c1, a1), random_slice(&m, &c2, a2)) else { return Ok(()) };
        let slices = vec![(s1, ratio(w, 4)), (s2, ratio(4 - w, 4))];
        let d = combo_diameter(&m, &slices).unwrap();
        prop_assert_eq!(&d.value, &brute_diameter(&m, &slices));
    }

    #[test]
    fn copies_of_a_slice_do_not_change_the_diameter(
        m in metric(2, 5),
        c in prop::collection::vec(-3i64..=3, 5),
        alpha in 1i64..=12,
        copies in 1usize..=4,
    ) {
        let Some(s) = random_slice(&m, &c, alpha) else { return Ok(()) };
        let single = slice_diameter(&m, &s).unwrap().value;
        let w = ratio(1, copies as i64);
        let combo: Vec<_> = (0..copies).map(|_| (s.clone(), w.clone())).collect();
        prop_assert_eq!(combo_diameter(&m, &combo).unwrap().value, single);
    }

    #[test]
    fn diameter_is_monotone_and_full_at_two(
        m in metric(2, 5),
        c in prop::collection::vec(-3i64..=3, 5),
        a in 1i64..=15,
        b in 1i64..=15,
    ) {
        let (lo, hi) = (a.min(b), a.max(b));
        let (Some(s_lo), Some(s_hi)) = (random_slice(&m, &c, lo), random_slice(&m, &c, hi)) else { return Ok(()) };
        prop_assert!(slice_diameter(&m, &s_lo).unwrap().value <= slice_diameter(&m, &s_hi).unwrap().value);
        let whole = Slice::new(&m, s_lo.functional(), q(2), false).unwrap();
        prop_assert_eq!(slice_diameter(&m, &whole).unwrap().value, q(2));
    }

    #[test]
    fn ssd2p_witnesses_verify(
        m in metric(3, 5),
        c in prop::collection::vec(-3i64..=3, 5),
        alpha in 2i64..=8,
        eps in 1i64..=7,
    ) {
        let Some(s) = random_slice(&m, &c, alpha) else { return Ok(()) };
        let eps = ratio(eps, 8);
        let report = ssd2p_witness(&m, std::slice::from_ref(&s), &eps).unwrap();
        match &report.witness {
            Some(w) => {
                prop_assert!(verify_ssd2p(&m, std::slice::from_ref(&s), &eps, w).unwrap());
                let flipped = Ssd2pWitness { g: w.g.scaled(&q(-1)), ..w.clone() };
                prop_assert!(verify_ssd2p(&m, &[s], &eps, &flipped).unwrap());
                let ev = eval_functional(&m, &FreeVector::zero(&m), &w.g).unwrap();
                prop_assert!(ev.is_zero());
            }
            None => prop_assert_eq!(report.table.len(), m.essential_pairs().len()),
        }
    }
}
