mod common;

use common::{metric, q, values};
use lipfree_core::free::{
    average_molecules, free_norm, molecule, normalize, norming_function, FreeError, FreeVector,
    NormMethod,
};
use lipfree_core::lip::{
    de_leeuw, eval_functional, extend_fltp, lip_norm, rs_split, LipError, LipFunction,
};
use lipfree_core::metric::{gen_example31, gen_example32, Example31Layout, Example32Layout};
use lipfree_core::{ratio, MetricSpace, Rational, SubsetMask};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

/// Largest `|f(x) − f(y)| / d(x, y)` by direct enumeration.
fn brute_lip(m: &MetricSpace, f: &[Rational]) -> Rational {
    let mut best = q(0);
    for x in 0..m.len() {
        for y in 0..m.len() {
            if x != y {
                let s = (f[x].clone() - f[y].clone()).abs() / m.d(x, y).clone();
                if s > best {
                    best = s;
                }
            }
        }
    }
    best
}

fn ex32_norming(size: usize) -> (MetricSpace, LipFunction) {
    let m = gen_example32::<Rational>(size).unwrap();
    let l = Example32Layout { size };
    let mut v = vec![q(0); m.len()];
    v[l.a(1)] = q(1);
    v[l.a(2)] = q(-1);
    for k in 1..=size {
        v[l.b(k)] = if k % 2 == 1 { q(1) } else { q(-1) };
    }
    let f = LipFunction::new(&m, v).unwrap();
    (m, f)
}

#[test]
fn example32_norming_function_has_norm_one() {
    for size in [2, 4, 6, 12] {
        let (m, f) = ex32_norming(size);
        assert_eq!(lip_norm(&m, &f).unwrap(), q(1));
    }
}

#[test]
fn example32_functional_takes_value_one() {
    let size = 12;
    let (m, f) = ex32_norming(size);
    let l = Example32Layout { size };
    let pairs: Vec<_> = (1..=size / 2)
        .map(|n| (l.b(2 * n - 1), l.b(2 * n)))
        .collect();
    let fn_ = average_molecules(&m, &pairs).unwrap();
    assert_eq!(eval_functional(&m, &fn_, &f).unwrap(), q(1));
    let ma = molecule(&m, l.a(1), l.a(2)).unwrap();
    let g = ma.add(&fn_).unwrap().scaled(&ratio(1, 2));
    assert_eq!(eval_functional(&m, &g, &f).unwrap(), q(1));
    assert_eq!(free_norm(&m, &g, NormMethod::Lp).unwrap(), q(1));
    assert_eq!(free_norm(&m, &g, NormMethod::Flow).unwrap(), q(1));
    assert_eq!(normalize(&m, &g).unwrap(), g);
}

#[test]
fn zero_function() {
    let m = gen_example31::<Rational>(2).unwrap();
    let f = LipFunction::zero(&m);
    assert_eq!(lip_norm(&m, &f).unwrap(), q(0));
    assert!(de_leeuw(&m, &f).unwrap().iter().all(|(_, v)| v.is_zero()));
}

#[test]
fn two_point_distance_function_slopes() {
    let m = common::closure(2, &[3]);
    let f = LipFunction::distance_to(&m, 0).scaled(&q(1));
    let t = de_leeuw(&m, &f).unwrap();
    assert_eq!(t.get(1, 0), &q(1));
    assert_eq!(t.get(0, 1), &q(-1));
}

#[test]
fn malformed_functions_are_rejected() {
    let m = gen_example31::<Rational>(2).unwrap();
    assert!(matches!(
        LipFunction::new(&m, vec![q(0); 2]),
        Err(LipError::Length {
            got: 2,
            expected: 6
        })
    ));
    let mut v = vec![q(0); 6];
    v[m.base()] = q(1);
    assert!(matches!(
        LipFunction::new(&m, v),
        Err(LipError::NonZeroBase(_))
    ));
}

#[test]
fn molecule_pairing_and_point_evaluation() {
    let m = gen_example31::<Rational>(3).unwrap();
    let (x, y) = (4, 7);
    let f = LipFunction::distance_to(&m, y);
    let mol = molecule(&m, x, y).unwrap();
    assert_eq!(eval_functional(&m, &mol, &f).unwrap(), q(1));
    let dx = FreeVector::delta(&m, x).unwrap();
    assert_eq!(eval_functional(&m, &dx, &f).unwrap(), f.value(x).clone());
    assert_eq!(mol.scaled(&q(-1)), molecule(&m, y, x).unwrap());
    assert!(matches!(molecule(&m, 2, 2), Err(FreeError::SamePoint(2))));
    assert!(matches!(
        average_molecules(&m, &[]),
        Err(FreeError::EmptyPairs)
    ));
}

#[test]
fn base_coefficient_is_dropped() {
    let m = common::closure(2, &[4]);
    let mol = molecule(&m, 1, 0).unwrap();
    assert_eq!(mol.iter().collect::<Vec<_>>(), vec![(1, &ratio(1, 4))]);
    assert!(FreeVector::delta(&m, 0).unwrap().is_zero());
    let two = FreeVector::from_coeffs(&m, [(1, q(2))]).unwrap();
    assert_eq!(normalize(&m, &two).unwrap().coeff(1), ratio(1, 4));
    assert!(matches!(
        normalize(&m, &FreeVector::zero(&m)),
        Err(FreeError::ZeroVector)
    ));
}

#[test]
fn extension_on_example31_level_two() {
    let m = gen_example31::<Rational>(4).unwrap();
    let l = Example31Layout { size: 4 };
    let a = SubsetMask::from_indices(m.len(), &[l.a(2), l.b(2)]);
    let h = LipFunction::zero(&m);
    let f = extend_fltp(&m, &a, l.a(2), l.b(2), &h, &ratio(1, 2)).unwrap();
    let nearest = (0..m.len())
        .filter(|&x| !a.contains(x))
        .map(|x| m.d(x, l.a(2)).clone())
        .min()
        .unwrap();
    assert_eq!(nearest, q(1));
    assert_eq!(f.value(l.a(2)), &q(1));
    assert!(lip_norm(&m, &f).unwrap() <= q(1));
    assert!(f.value(l.a(2)).clone() - f.value(l.b(2)).clone() >= ratio(1, 2));
}

#[test]
fn extension_with_full_delta_is_vacuous() {
    let m = gen_example31::<Rational>(3).unwrap();
    let a = SubsetMask::from_indices(m.len(), &[6, 8]);
    let f = extend_fltp(&m, &a, 6, 8, &LipFunction::zero(&m), &q(1)).unwrap();
    assert!(f.value(6).clone() - f.value(8).clone() >= q(0));
    assert!(lip_norm(&m, &f).unwrap() <= q(1));
}

#[test]
fn extension_rejects_bad_subsets() {
    let m = gen_example31::<Rational>(2).unwrap();
    let h = LipFunction::zero(&m);
    let with_base = SubsetMask::from_indices(m.len(), &[m.base(), 3]);
    assert!(matches!(
        extend_fltp(&m, &with_base, m.base(), 3, &h, &ratio(1, 2)),
        Err(LipError::BaseInSubset)
    ));
    let a = SubsetMask::from_indices(m.len(), &[3, 4]);
    assert!(matches!(
        extend_fltp(&m, &a, 3, 3, &h, &ratio(1, 2)),
        Err(LipError::BadEndpoints)
    ));
}

#[test]
fn split_with_zero_functions() {
    let m = gen_example31::<Rational>(3).unwrap();
    let l = Example31Layout { size: 3 };
    let a = SubsetMask::from_indices(m.len(), &[l.a(2), l.b(2)]);
    let hs = vec![LipFunction::zero(&m)];
    let split = rs_split(&m, &a, l.a(2), l.b(2), &hs, &ratio(1, 2)).unwrap();
    let expect = (0..m.len())
        .filter(|&x| !a.contains(x))
        .map(|x| m.d(x, l.a(2)).clone())
        .min()
        .unwrap();
    assert_eq!(split.r0, expect);
    assert!(split.r0.is_positive());
    assert_eq!(
        split.r.clone() + split.s.clone(),
        ratio(1, 2) * m.d(l.a(2), l.b(2)).clone()
    );
    assert!(matches!(
        rs_split(&m, &a, l.a(2), l.b(2), &[], &ratio(1, 2)),
        Err(LipError::EmptyFunctionList)
    ));
}

/// `(1 − delta)` times a combination of signed distance functions, so the
/// norm is at most `1 − delta`.
fn damped(m: &MetricSpace, picks: &[(usize, bool)], delta: &Rational) -> LipFunction {
    let mut f = LipFunction::zero(m);
    let w = (q(1) - delta.clone()) / q(picks.len() as i64);
    for &(z, pos) in picks {
        let g = LipFunction::distance_to(m, z % m.len());
        f = f.add_scaled(&g, &if pos { w.clone() } else { -w.clone() });
    }
    f
}

fn instance() -> impl Strategy<Value = (MetricSpace, Vec<usize>, Vec<(usize, bool)>, Rational)> {
    metric(3, 6).prop_flat_map(|m| {
        let n = m.len();
        (
            Just(m),
            prop::sample::subsequence((1..n).collect::<Vec<_>>(), 2..n),
            prop::collection::vec((0..n, any::<bool>()), 1..4),
            (1i64..=4).prop_map(|k| ratio(k, 5)),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_largest_slope(m in metric(2, 6), seed in values(6, 8)) {
        let f = LipFunction::new(&m, seed[..m.len()].to_vec()).unwrap();
        let n = lip_norm(&m, &f).unwrap();
        prop_assert_eq!(&n, &brute_lip(&m, f.values()));
        let t = de_leeuw(&m, &f).unwrap();
        prop_assert_eq!(t.sup_abs(), n.clone());
        for ((x, y), v) in t.iter() {
            prop_assert_eq!(v.clone(), -t.get(y, x).clone());
        }
        let c = ratio(-3, 2);
        prop_assert_eq!(lip_norm(&m, &f.scaled(&c)).unwrap(), n.clone() * ratio(3, 2));
        let scaled = m.scaled(&q(3));
        prop_assert_eq!(lip_norm(&scaled, &f).unwrap(), n / q(3));
    }

    #[test]
    fn norm_triangle_inequality(m in metric(2, 6), a in values(6, 8), b in values(6, 8)) {
        let n = m.len();
        let f = LipFunction::new(&m, a[..n].to_vec()).unwrap();
        let g = LipFunction::new(&m, b[..n].to_vec()).unwrap();
        let sum = f.add_scaled(&g, &q(1));
        prop_assert!(lip_norm(&m, &sum).unwrap() <= lip_norm(&m, &f).unwrap() + lip_norm(&m, &g).unwrap());
    }

    #[test]
    fn lp_and_flow_norms_agree(m in metric(2, 6), c in values(6, 6)) {
        let mu = FreeVector::from_coeffs(&m, c[..m.len()].iter().cloned().enumerate()).unwrap();
        let lp = free_norm(&m, &mu, NormMethod::Lp).unwrap();
        let flow = free_norm(&m, &mu, NormMethod::Flow).unwrap();
        prop_assert_eq!(&lp, &flow);
        prop_assert_eq!(lp.is_zero(), mu.is_zero());
        let scaled = m.scaled(&q(5));
        prop_assert_eq!(free_norm(&scaled, &mu, NormMethod::Lp).unwrap(), lp.clone() * q(5));
        prop_assert_eq!(free_norm(&m, &mu.scaled(&q(-2)), NormMethod::Flow).unwrap(), lp * q(2));
    }

    #[test]
    fn duality_sandwich(m in metric(2, 6), c in values(6, 6), v in values(6, 6)) {
        let n = m.len();
        let mu = FreeVector::from_coeffs(&m, c[..n].iter().cloned().enumerate()).unwrap();
        let (norm, best) = norming_function(&m, &mu).unwrap();
        prop_assert!(lip_norm(&m, &best).unwrap() <= q(1));
        prop_assert_eq!(eval_functional(&m, &mu, &best).unwrap(), norm.clone());
        let f = LipFunction::new(&m, v[..n].to_vec()).unwrap();
        let l = lip_norm(&m, &f).unwrap();
        if !l.is_zero() {
            let unit = f.scaled(&(q(1) / l));
            prop_assert!(eval_functional(&m, &mu, &unit).unwrap() <= norm);
        }
    }

    #[test]
    fn free_norm_triangle(m in metric(2, 6), a in values(6, 4), b in values(6, 4)) {
        let n = m.len();
        let x = FreeVector::from_coeffs(&m, a[..n].iter().cloned().enumerate()).unwrap();
        let y = FreeVector::from_coeffs(&m, b[..n].iter().cloned().enumerate()).unwrap();
        let s = free_norm(&m, &x.add(&y).unwrap(), NormMethod::Lp).unwrap();
        prop_assert!(s <= free_norm(&m, &x, NormMethod::Lp).unwrap() + free_norm(&m, &y, NormMethod::Lp).unwrap());
    }

    #[test]
    fn deltas_and_molecules(m in metric(2, 6), x in 0usize..6, y in 0usize..6) {
        let (x, y) = (x % m.len(), y % m.len());
        let dx = FreeVector::delta(&m, x).unwrap();
        prop_assert_eq!(free_norm(&m, &dx, NormMethod::Lp).unwrap(), m.d(x, m.base()).clone());
        prop_assert_eq!(free_norm(&m, &dx, NormMethod::Flow).unwrap(), m.d(x, m.base()).clone());
        if x != y {
            let mol = molecule(&m, x, y).unwrap();
            prop_assert_eq!(free_norm(&m, &mol, NormMethod::Lp).unwrap(), q(1));
            prop_assert_eq!(free_norm(&m, &mol, NormMethod::Flow).unwrap(), q(1));
            prop_assert_eq!(normalize(&m, &mol).unwrap(), mol.clone());
            let other = (x + 1) % m.len();
            if other != y {
                let avg = average_molecules(&m, &[(x, y), (other, y)]).unwrap();
                prop_assert!(free_norm(&m, &avg, NormMethod::Lp).unwrap() <= q(1));
            }
        }
    }

    #[test]
    fn extension_postconditions((m, a_idx, picks, delta) in instance(), uv in (0usize..8, 0usize..8)) {
        let n = m.len();
        let a = SubsetMask::from_indices(n, &a_idx);
        let u = a_idx[uv.0 % a_idx.len()];
        let v = a_idx[(uv.0 + 1 + uv.1 % (a_idx.len() - 1)) % a_idx.len()];
        prop_assume!(u != v);
        let h = damped(&m, &picks, &delta);
        let outside: Vec<usize> = (0..n).filter(|&x| !a.contains(x)).collect();
        let target = (q(1) - delta.clone()) * m.d(u, v).clone();
        let holds = outside.iter().all(|&x| outside.iter().all(|&y| {
            h.value(y).clone() - h.value(x).clone() + target.clone() <= m.d(x, u).clone() + m.d(y, v).clone()
        }));
        match extend_fltp(&m, &a, u, v, &h, &delta) {
            Ok(f) => {
                prop_assert!(holds);
                for &x in &outside {
                    prop_assert_eq!(f.value(x), h.value(x));
                }
                prop_assert!(brute_lip(&m, f.values()) <= q(1));
                prop_assert!(f.value(u).clone() - f.value(v).clone() >= target);
            }
            Err(LipError::ExtensionInequality { x, y }) => {
                prop_assert!(!holds);
                prop_assert!(h.value(y).clone() - h.value(x).clone() + target > m.d(x, u).clone() + m.d(y, v).clone());
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn split_matches_brute_force((m, a_idx, picks, delta) in instance()) {
        let n = m.len();
        let a = SubsetMask::from_indices(n, &a_idx);
        let (u, v) = (a_idx[0], a_idx[1]);
        let hs = vec![damped(&m, &picks, &delta), damped(&m, &picks[..1], &delta)];
        let outside: Vec<usize> = (0..n).filter(|&x| !a.contains(x)).collect();
        let half_min = |c: usize| {
            let mut best: Option<Rational> = None;
            for h in &hs {
                for &x in &outside {
                    for &y in &outside {
                        let g = m.d(x, c).clone() + m.d(y, c).clone() - (h.value(x).clone() - h.value(y).clone());
                        if best.as_ref().is_none_or(|b| g < *b) {
                            best = Some(g);
                        }
                    }
                }
            }
            best.unwrap() / q(2)
        };
        let (r0, s0) = (half_min(u), half_min(v));
        let target = (q(1) - delta.clone()) * m.d(u, v).clone();
        match rs_split(&m, &a, u, v, &hs, &delta) {
            Ok(split) => {
                prop_assert_eq!(&split.r0, &r0);
                prop_assert_eq!(&split.s0, &s0);
                prop_assert!(split.r.is_positive());
                prop_assert!(split.r <= r0 && split.s <= s0);
                prop_assert!(!split.s.is_negative());
                prop_assert_eq!(split.r + split.s, target);
            }
            Err(LipError::SplitTooSmall { .. }) => prop_assert!(r0 + s0 < target),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
