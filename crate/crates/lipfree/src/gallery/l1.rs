//! Drivers on subsets of `ℓ_1`: the column claim on `{e_i + e_j}` and
//! the window selection pipeline.

use lipfree_core::lip::{extend_fltp, lip_norm};
use lipfree_core::metric::{l1_distance, L1Points};
use lipfree_core::transfer::{
    fltp_check, fltp_search_ex31, l1_window_select, max_disjoint_blocks, ColumnClaim, FltpKind,
    PairGrid, PairWeights,
};
use lipfree_core::{ratio, LipFunction, MetricSpace, Rational, SubsetMask};
use rayon::prelude::*;

use super::GalleryError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSweep {
    /// `(A, u, v)` triples examined.
    pub cases: usize,
    /// Triples satisfying the two-point inequality off `A`.
    pub premise: usize,
    /// `(A as bits, u, v)` where no column works.
    pub failures: Vec<(u64, usize, usize)>,
    /// Largest number of disjoint sets `A` admitting some witness pair.
    pub disjoint: usize,
}

/// Every subset `A` of the grid `{e_i + e_j}` and every ordered pair of
/// distinct `u, v ∈ A`.
pub fn column_sweep(n: usize, eps: &Rational) -> Result<ColumnSweep, GalleryError> {
    if !(2..=5).contains(&n) {
        return Err(GalleryError::Range("n must lie in 2..=5"));
    }
    let grid: PairGrid = PairGrid::new(n)?;
    let len = grid.space().len();
    let per_set: Vec<(usize, usize, Vec<(u64, usize, usize)>, bool)> = (0u64..1 << len)
        .into_par_iter()
        .map(|bits| {
            let a = SubsetMask::from_bits(len, bits);
            let members: Vec<usize> = a.members().collect();
            let (mut cases, mut premise, mut fails) = (0, 0, Vec::new());
            for &u in &members {
                for &v in members.iter().filter(|&&v| v != u) {
                    cases += 1;
                    match grid.column_claim(eps, &a, u, v)? {
                        ColumnClaim::NotApplicable => {}
                        ColumnClaim::Holds { .. } => premise += 1,
                        ColumnClaim::Fails => {
                            premise += 1;
                            fails.push((bits, u, v));
                        }
                    }
                }
            }
            Ok((cases, premise, fails, premise > 0))
        })
        .collect::<Result<_, GalleryError>>()?;
    let mut sweep = ColumnSweep {
        cases: 0,
        premise: 0,
        failures: Vec::new(),
        disjoint: 0,
    };
    let mut passing = Vec::new();
    for (bits, (c, p, f, any)) in per_set.into_iter().enumerate() {
        sweep.cases += c;
        sweep.premise += p;
        sweep.failures.extend(f);
        if any {
            passing.push(bits as u32);
        }
    }
    sweep.disjoint = max_disjoint_blocks(len, &passing);
    Ok(sweep)
}

/// Outcome of one window selection trial, every flag recomputed here.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTrial {
    pub m: usize,
    pub mass: Rational,
    pub light: bool,
    pub separated: bool,
    pub fsltp: bool,
}

pub fn window_trial(
    points: &L1Points,
    eps: &Rational,
    mu: &PairWeights,
    fs: &[LipFunction],
) -> Result<WindowTrial, GalleryError> {
    let sel = l1_window_select(points, eps, mu, fs)?;
    let keep = ratio(1, 1) - eps.clone();
    let zero = vec![ratio(0, 1); points.coords[0].len()];
    let norm = |x: usize| l1_distance(&points.coords[x], &zero);
    let separated = sel.a.complement().members().all(|x| {
        [sel.u, sel.v].iter().all(|&w| {
            l1_distance(&points.coords[x], &points.coords[w]) >= keep.clone() * (norm(x) + norm(w))
        })
    });
    let mass = mu.mass_touching(&sel.a);
    let check = fltp_check(
        &points.space,
        FltpKind::Fsltp,
        mu,
        eps,
        fs,
        &sel.a,
        sel.u,
        sel.v,
    )?;
    Ok(WindowTrial {
        m: sel.m,
        light: mass < *eps,
        mass,
        separated,
        fsltp: check.passed(),
    })
}

/// One level-search trial on the three-column family followed by the
/// extension of `h_i = −(1 − δ) f_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionTrial {
    pub level: Option<usize>,
    pub fltp: bool,
    pub norm_ok: bool,
    pub agrees_off_a: bool,
    pub gap_ok: bool,
}

pub fn extension_trial(
    space: &MetricSpace,
    mu: &PairWeights,
    delta: &Rational,
    fs: &[LipFunction],
) -> Result<ExtensionTrial, GalleryError> {
    let Some(w) = fltp_search_ex31(space, mu, delta, fs, true)? else {
        return Ok(ExtensionTrial {
            level: None,
            fltp: false,
            norm_ok: false,
            agrees_off_a: false,
            gap_ok: false,
        });
    };
    let fltp = fltp_check(space, FltpKind::Fltp, mu, delta, fs, &w.a, w.u, w.v)?.passed();
    let keep = ratio(1, 1) - delta.clone();
    let (mut norm_ok, mut agrees, mut gap_ok) = (true, true, true);
    for f in fs {
        let h = f.scaled(&-keep.clone());
        let ext = extend_fltp(space, &w.a, w.u, w.v, &h, delta)?;
        norm_ok &= lip_norm(space, &ext)? <= ratio(1, 1);
        agrees &=
            w.a.complement()
                .members()
                .all(|x| ext.value(x) == h.value(x));
        gap_ok &= ext.value(w.u) - ext.value(w.v) >= keep.clone() * space.d(w.u, w.v);
    }
    Ok(ExtensionTrial {
        level: Some(w.k),
        fltp,
        norm_ok,
        agrees_off_a: agrees,
        gap_ok,
    })
}
