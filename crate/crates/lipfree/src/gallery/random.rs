//! Seeded random instances for the randomized drivers.

use lipfree_core::lip::lip_norm;
use lipfree_core::metric::{Example31Layout, L1Points};
use lipfree_core::transfer::PairWeights;
use lipfree_core::{ratio, LipFunction, MetricSpace, Rational};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GalleryError;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values `k / scale` with `|k| <= 2·scale`, shrunk into the unit ball.
pub fn ball_function(
    rng: &mut impl Rng,
    space: &MetricSpace,
    scale: i64,
) -> Result<LipFunction, GalleryError> {
    let values = (0..space.len())
        .map(|i| {
            if i == space.base() {
                ratio(0, 1)
            } else {
                ratio(rng.gen_range(-2 * scale..=2 * scale), scale)
            }
        })
        .collect();
    into_ball(space, values)
}

pub fn into_ball(space: &MetricSpace, values: Vec<Rational>) -> Result<LipFunction, GalleryError> {
    let f = LipFunction::new(space, values)?;
    let n = lip_norm(space, &f)?;
    Ok(if n > ratio(1, 1) {
        f.scaled(&(ratio(1, 1) / n))
    } else {
        f
    })
}

fn weights(
    rng: &mut impl Rng,
    space: &MetricSpace,
    support: &[usize],
    count: usize,
    denom: i64,
    max: i64,
) -> Vec<((usize, usize), Rational)> {
    (0..count)
        .filter_map(|_| {
            let x = *support.choose(rng)?;
            let y = *support.choose(rng)?;
            (x != y && x < space.len() && y < space.len())
                .then(|| ((x, y), ratio(rng.gen_range(1..=max), denom)))
        })
        .collect()
}

/// Pair weights on the three lowest levels, and one to three functions in
/// the unit ball, about half of them with a spike `f(a_L) − f(c_L) = 2`
/// at a random level below `K − 1`.
pub fn ex31_instance(
    rng: &mut impl Rng,
    space: &MetricSpace,
) -> Result<(PairWeights, Vec<LipFunction>), GalleryError> {
    let lay = Example31Layout {
        size: space.len() / 3,
    };
    let low: Vec<usize> = (0..space.len().min(9)).collect();
    let count = rng.gen_range(0..=6);
    let mu = PairWeights::from_entries(space, weights(rng, space, &low, count, 20, 8))?;
    let mut fs = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let noise = ball_function(rng, space, 4)?;
        let spike_top = lay.size.saturating_sub(2);
        if spike_top >= 1 && rng.gen_bool(0.5) {
            let level = rng.gen_range(1..=spike_top);
            let mut v: Vec<Rational> = noise.values().iter().map(|x| x / ratio(2, 1)).collect();
            v[lay.a(level)] = ratio(1, 1);
            v[lay.c(level)] = ratio(-1, 1);
            fs.push(into_ball(space, v)?);
        } else {
            fs.push(noise);
        }
    }
    Ok((mu, fs))
}

/// Pair weights concentrated on `{0, 2e_1, e_1 + e_2, 2e_2}` plus a few
/// light pairs anywhere, and up to three functions in the unit ball.
pub fn l1_instance(
    rng: &mut impl Rng,
    points: &L1Points,
) -> Result<(PairWeights, Vec<LipFunction>), GalleryError> {
    let space = &points.space;
    let heavy: Vec<usize> = ["0", "e1+e1", "e1+e2", "e2+e2"]
        .iter()
        .filter_map(|l| space.index_of(l))
        .collect();
    let all: Vec<usize> = (0..space.len()).collect();
    let count = rng.gen_range(0..=6);
    let mut entries = weights(rng, space, &heavy, count, 20, 10);
    let light = rng.gen_range(0..=4);
    entries.extend(weights(rng, space, &all, light, 100, 1));
    let mu = PairWeights::from_entries(space, entries)?;
    let fs = (0..rng.gen_range(0..=3))
        .map(|_| ball_function(rng, space, 4))
        .collect::<Result<_, _>>()?;
    Ok((mu, fs))
}

/// A family of subsets of `0..ground` in which every element lies in at
/// most `n − 1` sets, with nonnegative element weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub ground: usize,
    pub sets: Vec<Vec<usize>>,
    pub weights: Vec<Rational>,
    pub n: usize,
    pub delta: Rational,
}

pub fn lemma42_family(rng: &mut impl Rng) -> Family {
    let n = rng.gen_range(2..=4);
    let ground = rng.gen_range(4..=16);
    let mut holders = vec![0usize; ground];
    let sets = (0..rng.gen_range(1..=12))
        .map(|_| {
            (0..ground)
                .filter(|&e| {
                    let take = holders[e] + 1 < n && rng.gen_bool(0.3);
                    if take {
                        holders[e] += 1;
                    }
                    take
                })
                .collect()
        })
        .collect();
    let weights = (0..ground)
        .map(|_| ratio(rng.gen_range(0..=8), 4))
        .collect();
    let delta = ratio(rng.gen_range(1..=8), 4);
    Family {
        ground,
        sets,
        weights,
        n,
        delta,
    }
}
