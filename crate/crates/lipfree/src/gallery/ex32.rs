//! Bound probes on the space `{a_1, a_2, b_k, c_k}` and the slice of
//! `G_N = ½(m_{a_1, a_2} + avg_{n <= N} m_{b_{2n-1}, b_{2n}})`.

use lipfree_core::free::{average_molecules, molecule};
use lipfree_core::lip::{eval_functional, lip_norm};
use lipfree_core::metric::{gen_example32, Example32Layout};
use lipfree_core::probes::{slice_diameter, Cmp, ProbeOutcome, ProbeSystem, Slice, Term};
use lipfree_core::{FreeVector, LipFunction, MetricSpace, Rational};
use num_traits::{One, Signed};
use rayon::prelude::*;

use super::ex31::Bound;
use super::GalleryError;

#[derive(Debug, Clone)]
pub struct Ex32 {
    pub size: usize,
    pub pairs: usize,
    pub alpha: Rational,
    pub space: MetricSpace,
    pub lay: Example32Layout,
    pub g: FreeVector,
}

fn one() -> Rational {
    Rational::one()
}

fn at(point: usize) -> Term {
    Term::Value { unknown: 0, point }
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

impl Ex32 {
    pub fn new(size: usize, pairs: usize, alpha: Rational) -> Result<Self, GalleryError> {
        if !(2..=12).contains(&size) {
            return Err(GalleryError::Range("size must lie in 2..=12"));
        }
        if pairs == 0 || 2 * pairs > size {
            return Err(GalleryError::Range("need 1 <= N <= size / 2"));
        }
        if !alpha.is_positive() || alpha >= one() {
            return Err(GalleryError::Range("alpha must lie in (0, 1)"));
        }
        let space: MetricSpace = gen_example32(size)?;
        let lay = Example32Layout { size };
        let b_pairs: Vec<_> = (1..=pairs)
            .map(|n| (lay.b(2 * n - 1), lay.b(2 * n)))
            .collect();
        let half = Rational::new(1.into(), 2.into());
        let g = molecule(&space, lay.a(1), lay.a(2))?
            .add(&average_molecules(&space, &b_pairs)?)?
            .scaled(&half);
        Ok(Self {
            size,
            pairs,
            alpha,
            space,
            lay,
            g,
        })
    }

    /// `1` on `a_1` and odd `b`, `−1` on `a_2` and even `b`, `0` on `c`.
    pub fn norming_function(&self) -> Result<LipFunction, GalleryError> {
        let mut values = vec![Rational::from_integer(0.into()); self.space.len()];
        values[self.lay.a(1)] = one();
        values[self.lay.a(2)] = -one();
        for k in 1..=self.size {
            values[self.lay.b(k)] = if k % 2 == 1 { one() } else { -one() };
        }
        Ok(LipFunction::new(&self.space, values)?)
    }

    /// `(‖f‖, G_N(f))` for the norming function.
    pub fn norming_values(&self) -> Result<(Rational, Rational), GalleryError> {
        let f = self.norming_function()?;
        Ok((
            lip_norm(&self.space, &f)?,
            eval_functional(&self.space, &self.g, &f)?,
        ))
    }

    pub fn slice(&self, closed: bool) -> Result<Slice, GalleryError> {
        Ok(Slice::new(
            &self.space,
            &self.g,
            self.alpha.clone(),
            closed,
        )?)
    }

    fn ball(&self) -> ProbeSystem {
        let mut sys = ProbeSystem::new(1, 0);
        sys.lip_ball(vec![(0, one())], one());
        sys
    }

    fn in_slice(&self) -> Result<ProbeSystem, GalleryError> {
        let mut sys = self.ball();
        sys.slice(vec![(0, one())], self.slice(true)?);
        Ok(sys)
    }

    /// `f(p) − f(q) >= c·d(p, q)`.
    fn molecule_row(&self, sys: &mut ProbeSystem, p: usize, q: usize, c: Rational) {
        let rhs = c * self.space.d(p, q).clone();
        sys.linear(vec![(at(p), one()), (at(q), -one())], Cmp::Ge, rhs);
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

    fn max_probe(mut sys: ProbeSystem, p: usize, sign: Rational) -> ProbeSystem {
        sys.maximize(vec![(at(p), sign)]);
        sys
    }

    fn two_alpha(&self) -> Rational {
        one() - int(2) * self.alpha.clone()
    }

    /// With `m_{b_{2m-1}, b_{2m}}(f) >= 1 − 2α` in the slice: the values
    /// `min f(b_{2m-1})`, `−max f(b_{2m})` and `max |f(c_n)|` for
    /// `n <= 2m − 1`, reported as `(lower b bounds, c bounds)`.
    pub fn molecule_bounds(&self) -> Result<(Vec<Bound>, Vec<Bound>), GalleryError> {
        let mut b_probes = Vec::new();
        let mut c_probes = Vec::new();
        for m in 1..=self.pairs {
            let mut sys = self.in_slice()?;
            let (p, q) = (self.lay.b(2 * m - 1), self.lay.b(2 * m));
            self.molecule_row(&mut sys, p, q, self.two_alpha());
            b_probes.push((
                format!("m={m} min f(b{})", 2 * m - 1),
                Self::max_probe(sys.clone(), p, -one()),
            ));
            b_probes.push((
                format!("m={m} min -f(b{})", 2 * m),
                Self::max_probe(sys.clone(), q, one()),
            ));
            for n in 1..2 * m {
                for (s, sign) in [("+", one()), ("-", -one())] {
                    let name = format!("m={m} max {s}f(c{n})");
                    c_probes.push((name, Self::max_probe(sys.clone(), self.lay.c(n), sign)));
                }
            }
        }
        let negate = |v: Vec<Bound>| {
            v.into_iter()
                .map(|b| Bound {
                    value: b.value.map(|x| -x),
                    ..b
                })
                .collect()
        };
        Ok((negate(self.run(b_probes)?), self.run(c_probes)?))
    }

    /// `min f(a_1)` and `min −f(a_2)` over the slice itself (`joint`) and
    /// over the ball with only `m_{a_1, a_2}(f) >= 1 − 2α` and
    /// `m_{b_1, b_2}(f) >= 1 − 2α` (`split`).
    pub fn a_bounds(&self) -> Result<(Vec<Bound>, Vec<Bound>), GalleryError> {
        let (a1, a2) = (self.lay.a(1), self.lay.a(2));
        let joint = self.in_slice()?;
        let mut split = self.ball();
        self.molecule_row(&mut split, a1, a2, self.two_alpha());
        self.molecule_row(&mut split, self.lay.b(1), self.lay.b(2), self.two_alpha());
        let probes = |sys: &ProbeSystem, tag: &str| {
            vec![
                (
                    format!("{tag} min f(a1)"),
                    Self::max_probe(sys.clone(), a1, -one()),
                ),
                (
                    format!("{tag} min -f(a2)"),
                    Self::max_probe(sys.clone(), a2, one()),
                ),
            ]
        };
        let neg = |v: Vec<Bound>| -> Vec<Bound> {
            v.into_iter()
                .map(|b| Bound {
                    value: b.value.map(|x| -x),
                    ..b
                })
                .collect()
        };
        Ok((
            neg(self.run(probes(&joint, "slice"))?),
            neg(self.run(probes(&split, "molecules"))?),
        ))
    }

    /// With `f(a_1) >= 1 − 4α` and `f(a_2) <= −1 + 4α` in the ball: the
    /// values `min f(b_{odd})` and `max f(b_{even})`.
    pub fn b_bounds(&self) -> Result<Vec<Bound>, GalleryError> {
        let four = int(4) * self.alpha.clone();
        let mut sys = self.ball();
        sys.linear(
            vec![(at(self.lay.a(1)), one())],
            Cmp::Ge,
            one() - four.clone(),
        );
        sys.linear(vec![(at(self.lay.a(2)), one())], Cmp::Le, four - one());
        let mut probes = Vec::new();
        for k in 1..=self.size {
            let p = self.lay.b(k);
            if k % 2 == 1 {
                probes.push((
                    format!("min f(b{k})"),
                    Self::max_probe(sys.clone(), p, -one()),
                ));
            } else {
                probes.push((
                    format!("max f(b{k})"),
                    Self::max_probe(sys.clone(), p, one()),
                ));
            }
        }
        Ok(self
            .run(probes)?
            .into_iter()
            .enumerate()
            .map(|(i, b)| Bound {
                value: if i % 2 == 0 {
                    b.value.map(|x| -x)
                } else {
                    b.value
                },
                ..b
            })
            .collect())
    }

    pub fn diameter(&self) -> Result<Rational, GalleryError> {
        Ok(slice_diameter(&self.space, &self.slice(false)?)?.value)
    }
}
