//! Minimum-cost transshipment by successive shortest paths.
//!
//! Used as a second, LP-free way of computing free-space norms. Every
//! ordered pair of points is an uncapacitated arc with cost equal to the
//! distance; a super source feeds the positive coefficients and a super sink
//! drains the negative ones, with the base point balancing the total.

use alloc::vec;
use alloc::vec::Vec;

use crate::free::FreeVector;
use crate::metric::MetricSpace;
use crate::scalar::Scalar;

struct Arc<S> {
    to: usize,
    cap: Option<S>,
    cost: S,
    flow: S,
}

struct Network<S> {
    arcs: Vec<Arc<S>>,
    out: Vec<Vec<usize>>,
}

impl<S: Scalar> Network<S> {
    fn new(nodes: usize) -> Self {
        Self {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    /// Adds an arc and its zero-capacity reverse twin (index `id ^ 1`).
    fn add(&mut self, from: usize, to: usize, cap: Option<S>, cost: S) {
        let id = self.arcs.len();
        self.arcs.push(Arc {
            to,
            cap,
            cost: cost.clone(),
            flow: S::zero(),
        });
        self.arcs.push(Arc {
            to: from,
            cap: Some(S::zero()),
            cost: -cost,
            flow: S::zero(),
        });
        self.out[from].push(id);
        self.out[to].push(id + 1);
    }

    /// Remaining capacity; `None` means unbounded.
    fn residual(&self, id: usize) -> Option<S> {
        let a = &self.arcs[id];
        if id % 2 == 1 {
            // reverse arc: can cancel the forward flow
            Some(self.arcs[id - 1].flow.clone())
        } else {
            a.cap.as_ref().map(|c| c.clone() - a.flow.clone())
        }
    }

    fn push(&mut self, id: usize, amount: &S) {
        if id % 2 == 1 {
            self.arcs[id - 1].flow -= amount;
        } else {
            self.arcs[id].flow += amount;
        }
    }

    /// Bellman-Ford over arcs with positive residual capacity.
    fn shortest_path(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let n = self.out.len();
        let mut dist: Vec<Option<S>> = vec![None; n];
        let mut via: Vec<Option<usize>> = vec![None; n];
        dist[s] = Some(S::zero());
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                let Some(du) = dist[u].clone() else { continue };
                for &id in &self.out[u] {
                    if !self.residual(id).is_none_or(|r| r.is_pos()) {
                        continue;
                    }
                    let a = &self.arcs[id];
                    let cand = du.clone() + a.cost.clone();
                    let better = match &dist[a.to] {
                        None => true,
                        Some(cur) => cand.lt_tol(cur),
                    };
                    if better {
                        dist[a.to] = Some(cand);
                        via[a.to] = Some(id);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist[t].as_ref()?;
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let id = via[v]?;
            path.push(id);
            v = self.arcs[id ^ 1].to;
        }
        path.reverse();
        Some(path)
    }
}

/// Cheapest way to move the coefficients of `mu` to balance, with the base
/// point supplying or absorbing `−Σ mu`.
pub(crate) fn transport_cost<S: Scalar>(space: &MetricSpace<S>, mu: &FreeVector<S>) -> S {
    let n = space.len();
    let (source, sink) = (n, n + 1);
    let mut supply: Vec<S> = (0..n).map(|i| mu.coeff(i)).collect();
    let total = supply.iter().fold(S::zero(), |acc, v| acc + v.clone());
    supply[space.base()] = -total;
    let mut net = Network::new(n + 2);
    for x in 0..n {
        for y in 0..n {
            if x != y {
                net.add(x, y, None, space.d(x, y).clone());
            }
        }
    }
    for (x, s) in supply.iter().enumerate() {
        if s.is_pos() {
            net.add(source, x, Some(s.clone()), S::zero());
        } else if s.is_neg() {
            net.add(x, sink, Some(-s.clone()), S::zero());
        }
    }
    while let Some(path) = net.shortest_path(source, sink) {
        let amount = path
            .iter()
            .filter_map(|&id| net.residual(id))
            .reduce(|a, b| a.min_of(b))
            .expect("source and sink arcs are capacitated");
        if !amount.is_pos() {
            break;
        }
        for &id in &path {
            net.push(id, &amount);
        }
    }
    net.arcs
        .iter()
        .step_by(2)
        .fold(S::zero(), |acc, a| acc + a.flow.clone() * a.cost.clone())
}
