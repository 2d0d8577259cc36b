//! Long-trapezoid transfer properties of finite pointed metric spaces:
//! the plain and strong two-point conditions against a finite set, their
//! block-family and function-weighted versions, and the constructive
//! selections that produce witnesses for them.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::lip::{lip_norm, LipError, LipFunction};
use crate::metric::{gen_l1_pairs, L1Points, MetricSpace, StructureError, SubsetMask};
use crate::par;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransferError {
    #[error("point index {index} out of range for {len} points")]
    OutOfRange { index: usize, len: usize },
    #[error("u and v must be distinct, got {0} twice")]
    SamePoint(usize),
    #[error("eps must lie strictly between 0 and 1")]
    EpsOutOfRange,
    #[error("delta must be positive")]
    DeltaNotPositive,
    #[error("negative weight on ({x}, {y})")]
    NegativeWeight { x: usize, y: usize },
    #[error("weight on the diagonal pair ({0}, {0})")]
    DiagonalWeight(usize),
    #[error("mask or vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("witness {point} of block {block} lies outside its set")]
    WitnessOutside { block: usize, point: usize },
    #[error("blocks {first} and {second} overlap")]
    Overlap { first: usize, second: usize },
    #[error("function {0} has Lipschitz norm above one")]
    NormAboveOne(usize),
    #[error("sets {sets:?} all contain element {element}")]
    Intersection { sets: Vec<usize>, element: usize },
    #[error("intersection order n must be at least 1")]
    ZeroOrder,
    #[error("the base point must be the zero vector")]
    BaseNotZero,
    #[error("need at least two points besides the base")]
    TooFewPoints,
    #[error("point {x} is not separated from the witness {witness}")]
    Separation { x: usize, witness: usize },
    #[error("no admissible window inside the {0} available coordinates")]
    WindowsExhausted(usize),
    #[error(transparent)]
    Lip(#[from] LipError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Nonnegative weights on ordered pairs of distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct PairWeights<S = Rational> {
    len: usize,
    weights: BTreeMap<(usize, usize), S>,
}

impl<S: Scalar> PairWeights<S> {
    pub fn zero(space: &MetricSpace<S>) -> Self {
        Self {
            len: space.len(),
            weights: BTreeMap::new(),
        }
    }

    /// Repeated pairs are summed; zero weights are dropped.
    pub fn from_entries(
        space: &MetricSpace<S>,
        entries: impl IntoIterator<Item = ((usize, usize), S)>,
    ) -> Result<Self, TransferError> {
        let mut out = Self::zero(space);
        for ((x, y), w) in entries {
            for i in [x, y] {
                check_index(space, i)?;
            }
            if x == y {
                return Err(TransferError::DiagonalWeight(x));
            }
            if w.is_neg() {
                return Err(TransferError::NegativeWeight { x, y });
            }
            *out.weights.entry((x, y)).or_insert_with(S::zero) += &w;
        }
        out.weights.retain(|_, w| !w.is_zero());
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, x: usize, y: usize) -> S {
        self.weights.get(&(x, y)).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &S)> + '_ {
        self.weights.iter().map(|(p, w)| (*p, w))
    }

    pub fn total(&self) -> S {
        self.weights
            .values()
            .fold(S::zero(), |acc, w| acc + w.clone())
    }

    /// Mass of `Γ_A`, the pairs with at least one endpoint in `a`.
    pub fn mass_touching(&self, a: &SubsetMask) -> S {
        self.mass_where(|x, y| a.contains(x) || a.contains(y))
    }

    /// Mass of the pairs whose first point lies in `a`.
    pub fn mass_first(&self, a: &SubsetMask) -> S {
        self.mass_where(|x, _| a.contains(x))
    }

    /// Mass of the pairs whose second point lies in `a`.
    pub fn mass_second(&self, a: &SubsetMask) -> S {
        self.mass_where(|_, y| a.contains(y))
    }

    fn mass_where(&self, keep: impl Fn(usize, usize) -> bool) -> S {
        self.weights
            .iter()
            .filter(|((x, y), _)| keep(*x, *y))
            .fold(S::zero(), |acc, (_, w)| acc + w.clone())
    }

    pub fn convert<T: Scalar>(&self) -> PairWeights<T> {
        PairWeights {
            len: self.len,
            weights: self
                .weights
                .iter()
                .map(|(p, w)| (*p, T::from_rational(&w.to_rational())))
                .filter(|(_, w)| !w.is_zero())
                .collect(),
        }
    }
}

/// Pairwise disjoint blocks `A_m` with witnesses `u_m != v_m` inside them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SeqFamily {
    pub blocks: Vec<(SubsetMask, usize, usize)>,
}

impl SeqFamily {
    pub fn new(blocks: Vec<(SubsetMask, usize, usize)>) -> Self {
        Self { blocks }
    }

    /// Witness placement first, then disjointness, reporting the first
    /// offending block or pair of blocks.
    pub fn validate(&self, len: usize) -> Result<(), TransferError> {
        for (m, (a, u, v)) in self.blocks.iter().enumerate() {
            check_mask(a, len)?;
            if u == v {
                return Err(TransferError::SamePoint(*u));
            }
            for &p in [u, v] {
                if p >= len || !a.contains(p) {
                    return Err(TransferError::WitnessOutside { block: m, point: p });
                }
            }
        }
        for (i, (a, _, _)) in self.blocks.iter().enumerate() {
            for (j, (b, _, _)) in self.blocks.iter().enumerate().skip(i + 1) {
                if !a.is_disjoint(b) {
                    return Err(TransferError::Overlap {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LtpKind {
    /// Two-point inequality only.
    #[default]
    Ltp,
    /// Two-point and four-point inequalities.
    Sltp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FltpKind {
    #[default]
    Fltp,
    Fsltp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtpViolation {
    Pair {
        x: usize,
        y: usize,
    },
    Quad {
        x: usize,
        y: usize,
        z: usize,
        w: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FltpViolation<S = Rational> {
    /// `mu(Γ_A) >= eps`.
    Mass(S),
    Pair {
        x: usize,
        y: usize,
        i: usize,
    },
    Quad {
        x: usize,
        y: usize,
        z: usize,
        w: usize,
        i: usize,
        j: usize,
    },
}

/// First failure in the block order of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeqViolation {
    pub block: usize,
    pub violation: LtpViolation,
}

/// Outcome of a check: `Pass`, or the first violation in scan order.
#[derive(Debug, Clone, PartialEq)]
pub enum Check<V> {
    Pass,
    Fail(V),
}

impl<V> Check<V> {
    pub fn passed(&self) -> bool {
        matches!(self, Check::Pass)
    }

    pub fn violation(&self) -> Option<&V> {
        match self {
            Check::Pass => None,
            Check::Fail(v) => Some(v),
        }
    }

    fn from_option(v: Option<V>) -> Self {
        v.map_or(Check::Pass, Check::Fail)
    }
}

fn check_index<S: Scalar>(space: &MetricSpace<S>, i: usize) -> Result<(), TransferError> {
    if i < space.len() {
        Ok(())
    } else {
        Err(TransferError::OutOfRange {
            index: i,
            len: space.len(),
        })
    }
}

fn check_mask(a: &SubsetMask, len: usize) -> Result<(), TransferError> {
    if a.len() == len {
        Ok(())
    } else {
        Err(TransferError::Length {
            got: a.len(),
            expected: len,
        })
    }
}

fn check_eps<S: Scalar>(eps: &S) -> Result<(), TransferError> {
    if eps.is_pos() && (S::one() - eps.clone()).is_pos() {
        Ok(())
    } else {
        Err(TransferError::EpsOutOfRange)
    }
}

fn check_pair<S: Scalar>(space: &MetricSpace<S>, u: usize, v: usize) -> Result<(), TransferError> {
    check_index(space, u)?;
    check_index(space, v)?;
    if u == v {
        Err(TransferError::SamePoint(u))
    } else {
        Ok(())
    }
}

/// `table[x][y] = (1 − eps) t(x, y) − d(x, c) − d(y, c')` over `pts × pts`,
/// the per-pair side of every inequality in this module.
fn pair_table<S: Scalar>(
    space: &MetricSpace<S>,
    pts: &[usize],
    keep: &S,
    term: impl Fn(usize, usize) -> S,
    c: usize,
    c2: usize,
) -> Vec<Vec<S>> {
    pts.iter()
        .map(|&x| {
            pts.iter()
                .map(|&y| {
                    keep.clone() * term(x, y) - space.d(x, c).clone() - space.d(y, c2).clone()
                })
                .collect()
        })
        .collect()
}

/// First `(x, y)` with `table[x][y] + shift > 0`.
fn first_pair<S: Scalar>(table: &[Vec<S>], shift: &S) -> Option<(usize, usize)> {
    for (x, row) in table.iter().enumerate() {
        for (y, t) in row.iter().enumerate() {
            if !(t.clone() + shift.clone()).le_tol(&S::zero()) {
                return Some((x, y));
            }
        }
    }
    None
}

/// First `(x, y, z, w)` with `p[x][y] + q[z][w] + shift > 0`, scanning
/// every quadruple with the outer `x` in parallel.
fn first_quad<S: Scalar>(
    p: &[Vec<S>],
    q: &[Vec<S>],
    shift: &S,
) -> Option<(usize, usize, usize, usize)> {
    let rows: Vec<usize> = (0..p.len()).collect();
    let found = par::map(&rows, |&x| {
        for (y, pxy) in p[x].iter().enumerate() {
            let base = pxy.clone() + shift.clone();
            for (z, row) in q.iter().enumerate() {
                for (w, qzw) in row.iter().enumerate() {
                    if !(base.clone() + qzw.clone()).le_tol(&S::zero()) {
                        return Some((y, z, w));
                    }
                }
            }
        }
        None
    });
    found
        .into_iter()
        .enumerate()
        .find_map(|(x, hit)| hit.map(|(y, z, w)| (x, y, z, w)))
}

fn ltp_scan<S: Scalar>(
    space: &MetricSpace<S>,
    kind: LtpKind,
    pts: &[usize],
    eps: &S,
    u: usize,
    v: usize,
) -> Option<LtpViolation> {
    let keep = S::one() - eps.clone();
    let duv = keep.clone() * space.d(u, v).clone();
    let dist = |x: usize, y: usize| space.d(x, y).clone();
    let two = pair_table(space, pts, &keep, dist, u, v);
    if let Some((x, y)) = first_pair(&two, &duv) {
        return Some(LtpViolation::Pair {
            x: pts[x],
            y: pts[y],
        });
    }
    if kind == LtpKind::Ltp {
        return None;
    }
    let at_u = pair_table(space, pts, &keep, dist, u, u);
    let at_v = pair_table(space, pts, &keep, dist, v, v);
    let shift = duv.clone() + duv;
    first_quad(&at_u, &at_v, &shift).map(|(x, y, z, w)| LtpViolation::Quad {
        x: pts[x],
        y: pts[y],
        z: pts[z],
        w: pts[w],
    })
}

/// Checks `(1 − eps)(d(x,y) + d(u,v)) <= d(x,u) + d(y,v)` for all `x, y ∈ N`
/// and, for `Sltp`, also
/// `(1 − eps)(2d(u,v) + d(x,y) + d(z,w)) <= d(x,u) + d(y,u) + d(z,v) + d(w,v)`.
pub fn ltp_check<S: Scalar>(
    space: &MetricSpace<S>,
    kind: LtpKind,
    n: &SubsetMask,
    eps: &S,
    u: usize,
    v: usize,
) -> Result<Check<LtpViolation>, TransferError> {
    check_mask(n, space.len())?;
    check_pair(space, u, v)?;
    check_eps(eps)?;
    let pts: Vec<usize> = n.members().collect();
    Ok(Check::from_option(ltp_scan(space, kind, &pts, eps, u, v)))
}

/// First ordered pair `(u, v)` in lexicographic order passing [`ltp_check`].
pub fn ltp_search<S: Scalar>(
    space: &MetricSpace<S>,
    kind: LtpKind,
    n: &SubsetMask,
    eps: &S,
) -> Result<Option<(usize, usize)>, TransferError> {
    check_mask(n, space.len())?;
    check_eps(eps)?;
    let pts: Vec<usize> = n.members().collect();
    let pairs = space.off_diagonal();
    for chunk in pairs.pairs().chunks(par::SEARCH_CHUNK) {
        let ok = par::map(chunk, |&(u, v)| {
            ltp_scan(space, kind, &pts, eps, u, v).is_none()
        });
        if let Some(k) = ok.iter().position(|b| *b) {
            return Ok(Some(chunk[k]));
        }
    }
    Ok(None)
}

/// Checks every block of the family against all of `M ∖ A_m`, after
/// validating witnesses and disjointness.
pub fn seq_family_check<S: Scalar>(
    space: &MetricSpace<S>,
    fam: &SeqFamily,
    eps: &S,
    kind: LtpKind,
) -> Result<Check<SeqViolation>, TransferError> {
    fam.validate(space.len())?;
    check_eps(eps)?;
    for (block, (a, u, v)) in fam.blocks.iter().enumerate() {
        let pts: Vec<usize> = a.complement().members().collect();
        if let Some(violation) = ltp_scan(space, kind, &pts, eps, *u, *v) {
            return Ok(Check::Fail(SeqViolation { block, violation }));
        }
    }
    Ok(Check::Pass)
}

fn check_functions<S: Scalar>(
    space: &MetricSpace<S>,
    fs: &[LipFunction<S>],
) -> Result<(), TransferError> {
    for (i, f) in fs.iter().enumerate() {
        if !lip_norm(space, f)?.le_tol(&S::one()) {
            return Err(TransferError::NormAboveOne(i));
        }
    }
    Ok(())
}

fn increments<S: Scalar>(f: &LipFunction<S>) -> impl Fn(usize, usize) -> S + '_ {
    move |x, y| f.value(x).clone() - f.value(y).clone()
}

/// Checks `mu(Γ_A) < eps`, then
/// `(1 − eps)(f_i(x) − f_i(y) + d(u,v)) <= d(x,u) + d(y,v)` for
/// `x, y ∉ A` and every `i`, and for `Fsltp` also
/// `(1 − eps)(f_i(x) − f_i(y) + f_j(z) − f_j(w) + 2d(u,v))
///  <= d(x,u) + d(y,u) + d(z,v) + d(w,v)` by a full scan.
#[allow(clippy::too_many_arguments)]
pub fn fltp_check<S: Scalar>(
    space: &MetricSpace<S>,
    kind: FltpKind,
    mu: &PairWeights<S>,
    eps: &S,
    fs: &[LipFunction<S>],
    a: &SubsetMask,
    u: usize,
    v: usize,
) -> Result<Check<FltpViolation<S>>, TransferError> {
    check_mask(a, space.len())?;
    check_pair(space, u, v)?;
    for p in [u, v] {
        if !a.contains(p) {
            return Err(TransferError::WitnessOutside { block: 0, point: p });
        }
    }
    check_eps(eps)?;
    if mu.len() != space.len() {
        return Err(TransferError::Length {
            got: mu.len(),
            expected: space.len(),
        });
    }
    check_functions(space, fs)?;
    let mass = mu.mass_touching(a);
    if !mass.lt_tol(eps) {
        return Ok(Check::Fail(FltpViolation::Mass(mass)));
    }
    let pts: Vec<usize> = a.complement().members().collect();
    let keep = S::one() - eps.clone();
    let duv = keep.clone() * space.d(u, v).clone();
    for (i, f) in fs.iter().enumerate() {
        let t = pair_table(space, &pts, &keep, increments(f), u, v);
        if let Some((x, y)) = first_pair(&t, &duv) {
            return Ok(Check::Fail(FltpViolation::Pair {
                x: pts[x],
                y: pts[y],
                i,
            }));
        }
    }
    if kind == FltpKind::Fltp {
        return Ok(Check::Pass);
    }
    let at_u: Vec<_> = fs
        .iter()
        .map(|f| pair_table(space, &pts, &keep, increments(f), u, u))
        .collect();
    let at_v: Vec<_> = fs
        .iter()
        .map(|f| pair_table(space, &pts, &keep, increments(f), v, v))
        .collect();
    let shift = duv.clone() + duv;
    for (i, p) in at_u.iter().enumerate() {
        for (j, q) in at_v.iter().enumerate() {
            if let Some((x, y, z, w)) = first_quad(p, q, &shift) {
                return Ok(Check::Fail(FltpViolation::Quad {
                    x: pts[x],
                    y: pts[y],
                    z: pts[z],
                    w: pts[w],
                    i,
                    j,
                }));
            }
        }
    }
    Ok(Check::Pass)
}

/// Witness `A = {a_k, b_k}`, `u = a_k`, `v = b_k` in the three-column
/// family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelWitness {
    pub k: usize,
    pub a: SubsetMask,
    pub u: usize,
    pub v: usize,
}

/// Scans levels `k = 1, 2, ...` of a space built by
/// [`gen_example31`](crate::metric::gen_example31) for the first with
/// `mu(Γ_{a_k, b_k}) < eps` and `|f_i(a_l) − f_i(c_l)| <= 1` for all `i`
/// and `l >= k`. With `avoid_base` the level holding the base point `b_1`
/// is skipped.
pub fn fltp_search_ex31<S: Scalar>(
    space: &MetricSpace<S>,
    mu: &PairWeights<S>,
    eps: &S,
    fs: &[LipFunction<S>],
    avoid_base: bool,
) -> Result<Option<LevelWitness>, TransferError> {
    check_eps(eps)?;
    if !space.len().is_multiple_of(3) || space.is_empty() {
        return Err(TransferError::Length {
            got: space.len(),
            expected: 3 * (space.len() / 3).max(1),
        });
    }
    check_functions(space, fs)?;
    let lay = crate::metric::Example31Layout {
        size: space.len() / 3,
    };
    // levels from which on every function keeps a_l and c_l within 1
    let tame_from = (1..=lay.size)
        .rev()
        .take_while(|&l| {
            fs.iter().all(|f| {
                (f.value(lay.a(l)).clone() - f.value(lay.c(l)).clone())
                    .abs_val()
                    .le_tol(&S::one())
            })
        })
        .last()
        .unwrap_or(lay.size + 1);
    for k in tame_from.max(1)..=lay.size {
        let a = SubsetMask::from_indices(space.len(), &[lay.a(k), lay.b(k)]);
        if avoid_base && a.contains(space.base()) {
            continue;
        }
        if mu.mass_touching(&a).lt_tol(eps) {
            return Ok(Some(LevelWitness {
                k,
                a,
                u: lay.a(k),
                v: lay.b(k),
            }));
        }
    }
    Ok(None)
}

/// Output of [`l1_window_select`].
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSelection<S = Rational> {
    /// 1-based index of the accepted window.
    pub m: usize,
    /// Coordinates `K_{m-1}..K_m - 1`, 0-based.
    pub window: core::ops::Range<usize>,
    pub a: SubsetMask,
    pub u: usize,
    pub v: usize,
    /// Smallest and largest nonzero distance.
    pub r: S,
    pub big_r: S,
    /// `mu(Γ_A)` for the accepted window.
    pub mass: S,
}

fn window_mass<S: Scalar>(coords: &[S], window: &core::ops::Range<usize>) -> S {
    coords[window.clone()]
        .iter()
        .fold(S::zero(), |acc, c| acc + c.abs_val())
}

/// Walks consecutive coordinate windows. Each window ends at the smallest
/// coordinate for which two distinct nonzero points carry all but
/// `eps·r/2` of their norm inside it; those two become `u` and `v`, and
/// `A` collects the points with at least `eps·r/2` of mass in the window.
/// Returns the first window with `mu(Γ_A) < eps`, after checking
/// `‖x − u‖ >= (1 − eps)(‖x‖ + ‖u‖)` and the same for `v` on every
/// `x ∉ A`.
pub fn l1_window_select<S: Scalar>(
    points: &L1Points<S>,
    eps: &S,
    mu: &PairWeights<S>,
    fs: &[LipFunction<S>],
) -> Result<WindowSelection<S>, TransferError> {
    let space = &points.space;
    check_eps(eps)?;
    check_functions(space, fs)?;
    if mu.len() != space.len() {
        return Err(TransferError::Length {
            got: mu.len(),
            expected: space.len(),
        });
    }
    let base = space.base();
    if points.coords[base].iter().any(|c| !c.is_zero()) {
        return Err(TransferError::BaseNotZero);
    }
    let others: Vec<usize> = (0..space.len()).filter(|&i| i != base).collect();
    if others.len() < 2 {
        return Err(TransferError::TooFewPoints);
    }
    let (mut r, mut big_r) = (None::<S>, S::zero());
    for (x, y) in space.off_diagonal().pairs() {
        let d = space.d(*x, *y).clone();
        r = Some(match r {
            Some(cur) => cur.min_of(d.clone()),
            None => d.clone(),
        });
        big_r = big_r.max_of(d);
    }
    let r = r.expect("at least three points");
    let tau = eps.clone() * r.clone() / S::from_int(2);
    let dim = points.coords.iter().map(Vec::len).max().unwrap_or(0);
    let norms: Vec<S> = (0..space.len()).map(|i| points.norm(i)).collect();
    let mut start = 0;
    let mut m = 0;
    while start < dim {
        let chosen = (start + 1..=dim).find_map(|end| {
            let w = start..end;
            let mut hits = others.iter().copied().filter(|&x| {
                (norms[x].clone() - tau.clone()).le_tol(&window_mass(&points.coords[x], &w))
            });
            Some((end, hits.next()?, hits.next()?))
        });
        let Some((end, u, v)) = chosen else { break };
        m += 1;
        let window = start..end;
        let mut a = SubsetMask::empty(space.len());
        for x in 0..space.len() {
            if tau.le_tol(&window_mass(&points.coords[x], &window)) {
                a.insert(x);
            }
        }
        let mass = mu.mass_touching(&a);
        if mass.lt_tol(eps) {
            let keep = S::one() - eps.clone();
            for x in a.complement().members() {
                for c in [u, v] {
                    let bound = keep.clone() * (norms[x].clone() + norms[c].clone());
                    if !bound.le_tol(space.d(x, c)) {
                        return Err(TransferError::Separation { x, witness: c });
                    }
                }
            }
            return Ok(WindowSelection {
                m,
                window,
                a,
                u,
                v,
                r,
                big_r,
                mass,
            });
        }
        start = end;
    }
    Err(TransferError::WindowsExhausted(dim))
}

/// Counting bound for a family in which no `n` distinct sets share an
/// element.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionReport<S = Rational> {
    /// Number of sets with weight at least `delta`.
    pub heavy: usize,
    /// `(n − 1) μ(E) / delta`.
    pub bound: S,
    pub holds: bool,
}

/// Each element lies in at most `n − 1` sets, so `Σ_m μ(A_m) <= (n − 1) μ(E)`
/// and at most `(n − 1) μ(E) / delta` sets weigh `delta` or more.
pub fn intersection_bound<S: Scalar>(
    ground: usize,
    family: &[Vec<usize>],
    weights: &[S],
    n: usize,
    delta: &S,
) -> Result<IntersectionReport<S>, TransferError> {
    if n == 0 {
        return Err(TransferError::ZeroOrder);
    }
    if !delta.is_pos() {
        return Err(TransferError::DeltaNotPositive);
    }
    if weights.len() != ground {
        return Err(TransferError::Length {
            got: weights.len(),
            expected: ground,
        });
    }
    if let Some(e) = weights.iter().position(Scalar::is_neg) {
        return Err(TransferError::NegativeWeight { x: e, y: e });
    }
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); ground];
    for (m, set) in family.iter().enumerate() {
        let mut seen = SubsetMask::empty(ground);
        for &e in set {
            if e >= ground {
                return Err(TransferError::OutOfRange {
                    index: e,
                    len: ground,
                });
            }
            if !seen.contains(e) {
                seen.insert(e);
                holders[e].push(m);
            }
        }
    }
    if let Some((element, sets)) = holders.iter().enumerate().find(|(_, h)| h.len() >= n) {
        return Err(TransferError::Intersection {
            sets: sets[..n].to_vec(),
            element,
        });
    }
    let heavy = family
        .iter()
        .filter(|set| {
            let mut seen = SubsetMask::empty(ground);
            let w = set.iter().fold(S::zero(), |acc, &e| {
                if seen.contains(e) {
                    acc
                } else {
                    seen.insert(e);
                    acc + weights[e].clone()
                }
            });
            delta.le_tol(&w)
        })
        .count();
    let total = weights.iter().fold(S::zero(), |acc, w| acc + w.clone());
    let order = i64::try_from(n - 1).expect("order fits in i64");
    let bound = S::from_int(order) * total / delta.clone();
    let count = S::from_int(i64::try_from(heavy).expect("count fits in i64"));
    let holds = count.le_tol(&bound);
    Ok(IntersectionReport {
        heavy,
        bound,
        holds,
    })
}

/// The points `e_i + e_j`, `1 <= i <= j <= n`, of `ℓ_1^n` with their column
/// structure.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGrid<S = Rational> {
    pub n: usize,
    pub points: L1Points<S>,
    index: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnClaim {
    /// The two-point inequality fails somewhere off `A`.
    NotApplicable,
    /// Column `m` (1-based) has at most two points outside `A`.
    Holds {
        m: usize,
    },
    Fails,
}

impl<S: Scalar> PairGrid<S> {
    pub fn new(n: usize) -> Result<Self, TransferError> {
        let points = gen_l1_pairs(n, false, true)?;
        let mut index = vec![vec![0; n]; n];
        let mut next = 0;
        for i in 0..n {
            for j in i..n {
                index[i][j] = next;
                index[j][i] = next;
                next += 1;
            }
        }
        Ok(Self { n, points, index })
    }

    pub fn space(&self) -> &MetricSpace<S> {
        &self.points.space
    }

    /// Index of `e_i + e_j`, 1-based `i` and `j`.
    pub fn point(&self, i: usize, j: usize) -> usize {
        self.index[i - 1][j - 1]
    }

    /// If `(A, u, v)` satisfies the two-point inequality on `M ∖ A`, looks
    /// for a column `{e_m + e_k : k}` with at most two points outside `A`.
    pub fn column_claim(
        &self,
        eps: &S,
        a: &SubsetMask,
        u: usize,
        v: usize,
    ) -> Result<ColumnClaim, TransferError> {
        let space = self.space();
        check_mask(a, space.len())?;
        check_pair(space, u, v)?;
        check_eps(eps)?;
        for p in [u, v] {
            if !a.contains(p) {
                return Err(TransferError::WitnessOutside { block: 0, point: p });
            }
        }
        let pts: Vec<usize> = a.complement().members().collect();
        if ltp_scan(space, LtpKind::Ltp, &pts, eps, u, v).is_some() {
            return Ok(ColumnClaim::NotApplicable);
        }
        let found =
            (0..self.n).find(|&m| self.index[m].iter().filter(|&&p| !a.contains(p)).count() <= 2);
        Ok(found.map_or(ColumnClaim::Fails, |m| ColumnClaim::Holds { m: m + 1 }))
    }
}

/// Largest number of pairwise disjoint sets among `blocks`, given as bit
/// masks over at most 20 points.
pub fn max_disjoint_blocks(points: usize, blocks: &[u32]) -> usize {
    assert!(points <= 20, "bit-mask search is limited to 20 points");
    let full = if points == 0 { 0 } else { (1u32 << points) - 1 };
    let mut allowed = vec![false; 1 << points];
    for &b in blocks {
        if b != 0 && b & !full == 0 {
            allowed[b as usize] = true;
        }
    }
    let mut best = vec![0usize; 1 << points];
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        // either the lowest point is left unused or some block covers it
        let mut val = best[(mask ^ low) as usize];
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let block = sub | low;
            if allowed[block as usize] {
                val = val.max(1 + best[(mask ^ block) as usize]);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[mask as usize] = val;
    }
    best[full as usize]
}
