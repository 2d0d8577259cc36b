//! Bound probes and searches on the three-column family `{a_k, b_k, c_k}`.

use lipfree_core::free::{average_molecules, molecule};
use lipfree_core::metric::{gen_example31, Example31Layout};
use lipfree_core::probes::{
    combo_diameter, ssd2p_witness, verify_ssd2p, Cmp, ProbeOutcome, ProbeSystem, Slice, Term,
};
use lipfree_core::{FreeVector, MetricSpace, Rational};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::GalleryError;

/// Unknown indices in the bound probes.
const F1: usize = 0;
const F2: usize = 1;
const G: usize = 2;

/// One maximized quantity and its optimum (`None` when the system is
/// infeasible, which makes any bound hold vacuously).
#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub name: String,
    pub value: Option<Rational>,
}

/// The space, `F = m_{a_1, c_1}` and the finite surrogate
/// `G_N = avg_{n <= N} m_{a_{2n-1}, a_{2n}}` with `N = K / 2`.
#[derive(Debug, Clone)]
pub struct Ex31 {
    pub size: usize,
    pub alpha: Rational,
    pub space: MetricSpace,
    pub lay: Example31Layout,
    pub f: FreeVector,
    pub g: FreeVector,
}

fn one() -> Rational {
    Rational::one()
}

fn val(unknown: usize, point: usize) -> Term {
    Term::Value { unknown, point }
}

impl Ex31 {
    pub fn new(size: usize, alpha: Rational) -> Result<Self, GalleryError> {
        if !(2..=12).contains(&size) {
            return Err(GalleryError::Range("size must lie in 2..=12"));
        }
        if !alpha.is_positive() || alpha >= one() {
            return Err(GalleryError::Range("alpha must lie in (0, 1)"));
        }
        let space: MetricSpace = gen_example31(size)?;
        let lay = Example31Layout { size };
        let f = molecule(&space, lay.a(1), lay.c(1))?;
        let pairs: Vec<_> = (1..=size / 2)
            .map(|n| (lay.a(2 * n - 1), lay.a(2 * n)))
            .collect();
        let g = average_molecules(&space, &pairs)?;
        Ok(Self {
            size,
            alpha,
            space,
            lay,
            f,
            g,
        })
    }

    pub fn slices(&self, closed: bool) -> Result<(Slice, Slice), GalleryError> {
        Ok((
            Slice::new(&self.space, &self.f, self.alpha.clone(), closed)?,
            Slice::new(&self.space, &self.g, self.alpha.clone(), closed)?,
        ))
    }

    /// `f_1 ± g ∈ S(F, α)` (closed), each in the unit ball.
    fn first_slice_system(&self) -> Result<ProbeSystem, GalleryError> {
        let (s1, _) = self.slices(true)?;
        let mut sys = ProbeSystem::new(3, 1);
        for sign in [one(), -one()] {
            let combo = vec![(F1, one()), (G, sign)];
            sys.lip_ball(combo.clone(), one());
            sys.slice(combo, s1.clone());
        }
        Ok(sys)
    }

    fn run(&self, probes: Vec<(String, ProbeSystem)>) -> Result<Vec<Bound>, GalleryError> {
        probes
            .into_par_iter()
            .map(|(name, sys)| {
                let value = match sys.bound_probe(&self.space)? {
                    ProbeOutcome::Optimal { value, .. } => Some(value),
                    ProbeOutcome::Infeasible { .. } => None,
                    ProbeOutcome::Unbounded => return Err(GalleryError::Unbounded(name)),
                };
                Ok(Bound { name, value })
            })
            .collect()
    }

    /// `max ±g(a_n)` and `max ±g(c_n)` for every level.
    pub fn g_bounds(&self) -> Result<Vec<Bound>, GalleryError> {
        let base = self.first_slice_system()?;
        let mut probes = Vec::new();
        for n in 1..=self.size {
            for (col, p) in [("a", self.lay.a(n)), ("c", self.lay.c(n))] {
                for (s, sign) in [("+", one()), ("-", -one())] {
                    let mut sys = base.clone();
                    sys.maximize(vec![(val(G, p), sign)]);
                    probes.push((format!("{s}g({col}{n})"), sys));
                }
            }
        }
        self.run(probes)
    }

    /// For each essential pair `(p, q)` forced to carry
    /// `g(p) − g(q) >= (1 − α) d(p, q)`, the least possible `max_k |g(b_k)|`.
    pub fn b_level(&self) -> Result<Vec<Bound>, GalleryError> {
        let base = self.first_slice_system()?;
        let keep = one() - self.alpha.clone();
        let t = Term::Scalar(0);
        let mut probes = Vec::new();
        for (p, q) in self.space.essential_pairs() {
            let mut sys = base.clone();
            sys.linear(
                vec![(val(G, p), one()), (val(G, q), -one())],
                Cmp::Ge,
                keep.clone() * self.space.d(p, q).clone(),
            );
            for k in 1..=self.size {
                for sign in [one(), -one()] {
                    sys.linear(
                        vec![(t, one()), (val(G, self.lay.b(k)), -sign)],
                        Cmp::Ge,
                        Rational::zero(),
                    );
                }
            }
            sys.maximize(vec![(t, -one())]);
            let name = format!("{}-{}", self.space.label(p), self.space.label(q));
            probes.push((name, sys));
        }
        Ok(self
            .run(probes)?
            .into_iter()
            .map(|b| Bound {
                value: b.value.map(|v| -v),
                ..b
            })
            .collect())
    }

    /// With `g(b_k) >= 1 − 3α` and `‖f_2 ± g‖ <= 1`, the largest
    /// `±(f_2(a_l) − f_2(a_{l+1}))` for `k <= l < K`.
    pub fn pinch(&self) -> Result<Vec<Bound>, GalleryError> {
        let base = self.first_slice_system()?;
        let floor = one() - Rational::from_integer(3.into()) * self.alpha.clone();
        let mut probes = Vec::new();
        for k in 2..=self.size {
            let mut sys = base.clone();
            for sign in [one(), -one()] {
                sys.lip_ball(vec![(F2, one()), (G, sign)], one());
            }
            sys.linear(vec![(val(G, self.lay.b(k)), one())], Cmp::Ge, floor.clone());
            for l in k..self.size {
                for (s, sign) in [("+", one()), ("-", -one())] {
                    let mut p = sys.clone();
                    p.maximize(vec![
                        (val(F2, self.lay.a(l)), sign.clone()),
                        (val(F2, self.lay.a(l + 1)), -sign),
                    ]);
                    probes.push((format!("k={k} {s}(f2(a{l})-f2(a{}))", l + 1), p));
                }
            }
        }
        self.run(probes)
    }

    /// Diameter of `½ S(F, α) + ½ S(G_N, α)`.
    pub fn combo_diameter(&self) -> Result<Rational, GalleryError> {
        let (s1, s2) = self.slices(false)?;
        let half = Rational::new(1.into(), 2.into());
        Ok(combo_diameter(&self.space, &[(s1, half.clone()), (s2, half)])?.value)
    }

    /// Whether `f_1 ± g ∈ S(F, α)`, `f_2 ± g ∈ S(G_N, α)` with
    /// `‖g‖ >= 1 − eps` has a solution, and how many pairs were tried.
    pub fn ssd2p(&self, eps: &Rational) -> Result<(bool, usize), GalleryError> {
        let (s1, s2) = self.slices(false)?;
        let slices = [s1, s2];
        let report = ssd2p_witness(&self.space, &slices, eps)?;
        let found = match &report.witness {
            Some(w) => {
                if !verify_ssd2p(&self.space, &slices, eps, w)? {
                    return Err(GalleryError::Certificate("ssd2p witness"));
                }
                true
            }
            None => false,
        };
        Ok((found, report.table.len()))
    }
}
