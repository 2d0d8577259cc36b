#![allow(dead_code)]

use lipfree_core::{MetricSpace, Rational};
use proptest::prelude::*;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Shortest-path closure of a complete graph with the given edge weights.
pub fn closure(n: usize, weights: &[i64]) -> MetricSpace {
    let mut d = vec![vec![q(0); n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            d[i][j] = q(weights[k]);
            d[j][i] = q(weights[k]);
            k += 1;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][m].clone() + d[m][j].clone();
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    MetricSpace::from_parts(labels, 0, d).unwrap()
}

/// Random metric space on `lo..=hi` points, base point 0.
pub fn metric(lo: usize, hi: usize) -> impl Strategy<Value = MetricSpace> {
    (lo..=hi).prop_flat_map(|n| {
        prop::collection::vec(1i64..=6, n * (n - 1) / 2).prop_map(move |w| closure(n, &w))
    })
}

/// Random values vanishing at point 0.
pub fn values(n: usize, range: i64) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(-range..=range, n - 1).prop_map(|v| {
        std::iter::once(q(0))
            .chain(v.into_iter().map(|x| Rational::new(x.into(), 2.into())))
            .collect()
    })
}

/// Rescales `vals` so that every slope is at most one.
pub fn into_ball(m: &MetricSpace, vals: Vec<Rational>) -> lipfree_core::LipFunction {
    let mut worst = q(1);
    for x in 0..m.len() {
        for y in 0..m.len() {
            if x != y {
                let s = (vals[x].clone() - vals[y].clone()) / m.d(x, y).clone();
                if s > worst {
                    worst = s;
                }
            }
        }
    }
    let scaled = vals.into_iter().map(|v| v / worst.clone()).collect();
    lipfree_core::LipFunction::new(m, scaled).unwrap()
}
