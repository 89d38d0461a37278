//! Conflict-free collections of colorings and the covering number.
//!
//! A collection is CF when every edge is CF under at least one member. Its
//! cost is the sum of the member palette sizes. Besides exact search on tiny
//! instances this module builds the `O(ln^2 gamma)` collection: one coloring
//! for the edges of size at least `kappa = 2 ln(gamma) - 1`, plus rounds of
//! biased two-colorings for each band of smaller edges. Both parts are drawn
//! at random and resampled Moser-Tardos style until every edge is covered,
//! so the output is always verified and only its size is random.

use std::collections::HashMap;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::search::mask_edge_cf;
use crate::coloring::{
    cf_witness, expand_to_kfold, for_each_canonical, greedy_cf_coloring, BitColoring, ColorMask,
    KFoldColoring,
};
use crate::error::{Error, Result};
use crate::instance::{gamma, PicodInstance};

/// Edge limit for the exhaustive set-cover searches (states are edge subsets).
pub(crate) const MAX_COVER_EDGES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColoringCollection {
    k: usize,
    colorings: Vec<KFoldColoring>,
}

#[derive(Deserialize)]
struct RawCollection {
    k: usize,
    colorings: Vec<KFoldColoring>,
}

impl<'de> Deserialize<'de> for ColoringCollection {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCollection::deserialize(de)?;
        ColoringCollection::new(raw.k, raw.colorings).map_err(serde::de::Error::custom)
    }
}

impl ColoringCollection {
    pub fn new(k: usize, colorings: Vec<KFoldColoring>) -> Result<Self> {
        if let Some(first) = colorings.first() {
            for (p, c) in colorings.iter().enumerate() {
                if c.k() != k {
                    return Err(Error::InvalidColoring(format!(
                        "member {p} has fold {}, collection fold is {k}",
                        c.k()
                    )));
                }
                if c.num_vertices() != first.num_vertices() {
                    return Err(Error::DomainMismatch {
                        expected: first.num_vertices(),
                        found: c.num_vertices(),
                    });
                }
            }
        }
        Ok(Self { k, colorings })
    }

    pub fn singleton(c: KFoldColoring) -> Self {
        Self {
            k: c.k(),
            colorings: vec![c],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn colorings(&self) -> &[KFoldColoring] {
        &self.colorings
    }

    pub fn len(&self) -> usize {
        self.colorings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colorings.is_empty()
    }

    /// Sum of member palette sizes.
    pub fn total_colors(&self) -> usize {
        self.colorings.iter().map(KFoldColoring::palette).sum()
    }

    /// Concatenation; both collections must share fold and vertex set.
    pub fn concat(&self, other: &ColoringCollection) -> Result<ColoringCollection> {
        let mut colorings = self.colorings.clone();
        colorings.extend(other.colorings.iter().cloned());
        let k = if self.is_empty() { other.k } else { self.k };
        ColoringCollection::new(k, colorings)
    }

    fn check_domain(&self, inst: &PicodInstance) -> Result<()> {
        match self.colorings.first() {
            Some(c) => c.check_domain(inst),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("collection serialization cannot fail")
    }
}

/// First member under which `edge` is CF.
pub fn covering_member(col: &ColoringCollection, edge: &[usize]) -> Option<usize> {
    col.colorings.iter().position(|c| cf_witness(c, edge).is_some())
}

pub fn is_cf_collection(col: &ColoringCollection, inst: &PicodInstance) -> Result<bool> {
    col.check_domain(inst)?;
    Ok(inst.edges().iter().all(|e| covering_member(col, e).is_some()))
}

/// Member-wise block expansion of a 1-fold collection.
pub fn expand_collection(col: &ColoringCollection, k: usize) -> Result<ColoringCollection> {
    let colorings = col
        .colorings
        .iter()
        .map(|c| expand_to_kfold(c, k))
        .collect::<Result<Vec<_>>>()?;
    ColoringCollection::new(k, colorings)
}

/// `ceil(log2 m)` two-colorings; coloring `p` gives vertex `j` the `p`-th bit of `j`.
/// Any two distinct vertices differ in some bit, so every 2-element edge is covered.
pub fn binary_collection(m: usize) -> Result<ColoringCollection> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "binary collection needs m >= 2, got {m}"
        )));
    }
    let bits = usize::BITS - (m - 1).leading_zeros();
    let colorings = (0..bits)
        .map(|p| {
            let colors: Vec<usize> = (0..m).map(|j| (j >> p) & 1).collect();
            KFoldColoring::from_colors(2, &colors).expect("two colors")
        })
        .collect();
    ColoringCollection::new(1, colorings)
}

/// Covering number found by exhaustive search, with a witness collection.
///
/// Every canonical k-fold coloring with at most `budget` colors is turned into
/// the set of distinct edges it makes CF, charged by the number of colors it
/// uses; a shortest-path pass over edge subsets then picks the cheapest cover.
pub fn exact_alpha_cf(inst: &PicodInstance, k: usize, budget: usize) -> Result<(usize, ColoringCollection)> {
    let (distinct, _) = inst.distinct_edges();
    if distinct.is_empty() {
        return Ok((0, ColoringCollection::new(k, Vec::new())?));
    }
    if distinct.len() > MAX_COVER_EDGES {
        return Err(Error::TooLarge(format!(
            "{} distinct edges, limit {MAX_COVER_EDGES}",
            distinct.len()
        )));
    }
    let active = inst.active_vertices().len();
    let palette = budget.min(k * active);
    if palette < k {
        return Err(Error::LimitExceeded {
            what: "conflict-free covering number",
            limit: budget,
        });
    }

    let mut best: HashMap<u32, (usize, Vec<ColorMask>)> = HashMap::new();
    for_each_canonical(inst, k, palette, false, |masks| {
        let cover = cover_mask(masks, &distinct);
        if cover != 0 {
            let used = used_colors(masks).max(k);
            match best.get(&cover) {
                Some((cost, _)) if *cost <= used => {}
                _ => {
                    best.insert(cover, (used, masks.to_vec()));
                }
            }
        }
        ControlFlow::Continue(())
    })?;

    let items: Vec<(u32, usize)> = best.iter().map(|(&mask, (cost, _))| (mask, *cost)).collect();
    let full = (1u32 << distinct.len()) - 1;
    let path = cheapest_cover(&items, full).filter(|(cost, _)| *cost <= budget);
    let Some((cost, picks)) = path else {
        return Err(Error::LimitExceeded {
            what: "conflict-free covering number",
            limit: budget,
        });
    };
    let colorings = picks
        .into_iter()
        .map(|mask| {
            let (used, masks) = &best[&mask];
            BitColoring {
                k,
                palette: *used,
                masks: masks.clone(),
            }
            .to_coloring()
        })
        .collect();
    Ok((cost, ColoringCollection::new(k, colorings)?))
}

pub(crate) fn used_colors(masks: &[ColorMask]) -> usize {
    let all = masks.iter().fold(0, |acc, m| acc | m);
    64 - all.leading_zeros() as usize
}

fn cover_mask(masks: &[ColorMask], distinct: &[Vec<usize>]) -> u32 {
    distinct
        .iter()
        .enumerate()
        .filter(|(_, e)| mask_edge_cf(masks, e))
        .fold(0, |acc, (i, _)| acc | 1 << i)
}

/// Minimum-cost union of `items` reaching `full`; returns the cost and the
/// chosen item masks. Every transition only adds bits, so visiting states in
/// increasing numeric order is a valid topological order.
pub(crate) fn cheapest_cover(items: &[(u32, usize)], full: u32) -> Option<(usize, Vec<u32>)> {
    let mut items: Vec<(u32, usize)> = items.to_vec();
    // drop items dominated by a superset that costs no more
    items.sort_by_key(|&(mask, cost)| (cost, std::cmp::Reverse(mask.count_ones()), mask));
    let mut kept: Vec<(u32, usize)> = Vec::new();
    for (mask, cost) in items {
        if !kept.iter().any(|&(m, c)| c <= cost && mask & !m == 0) {
            kept.push((mask, cost));
        }
    }
    let states = full as usize + 1;
    let mut dist = vec![usize::MAX; states];
    let mut prev: Vec<(u32, u32)> = vec![(0, 0); states];
    dist[0] = 0;
    for s in 0..states {
        if dist[s] == usize::MAX {
            continue;
        }
        for &(mask, cost) in &kept {
            let t = (s as u32 | mask) as usize;
            if t != s && dist[s] + cost < dist[t] {
                dist[t] = dist[s] + cost;
                prev[t] = (s as u32, mask);
            }
        }
    }
    if dist[full as usize] == usize::MAX {
        return None;
    }
    let mut picks = Vec::new();
    let mut at = full;
    while at != 0 {
        let (from, mask) = prev[at as usize];
        picks.push(mask);
        at = from;
    }
    picks.reverse();
    Some((dist[full as usize], picks))
}

/// One biased two-coloring: each vertex independently takes color 0 with probability `q`.
pub fn random_round_coloring(vertices: usize, q: f64, seed: u64) -> Result<KFoldColoring> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("probability {q} not in (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colors: Vec<usize> = (0..vertices).map(|_| usize::from(!rng.gen_bool(q))).collect();
    KFoldColoring::from_colors(2, &colors)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bucket {
    /// Upper size threshold `k_i`; members satisfy `k_i / 2 <= |E| < k_i`.
    pub threshold: f64,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketDecomposition {
    pub gamma: usize,
    pub kappa: f64,
    /// Receivers whose request-set has size at least `kappa`.
    pub large: Vec<usize>,
    pub buckets: Vec<Bucket>,
}

/// Splits the receivers by request-set size into the large part and the
/// bands `[k_i / 2, k_i)`.
pub fn bucket_decomposition(inst: &PicodInstance) -> Result<BucketDecomposition> {
    let profile = gamma(inst);
    let Some(kappa) = profile.kappa else {
        return Err(Error::GammaTooSmall { gamma: profile.gamma });
    };
    let mut buckets: Vec<Bucket> = profile
        .thresholds
        .iter()
        .map(|&threshold| Bucket {
            threshold,
            edges: Vec::new(),
        })
        .collect();
    let mut large = Vec::new();
    for (r, edge) in inst.edges().iter().enumerate() {
        let size = edge.len() as f64;
        if size >= kappa {
            large.push(r);
            continue;
        }
        let slot = buckets
            .iter_mut()
            .find(|b| b.threshold / 2.0 <= size && size < b.threshold)
            .expect("thresholds reach every edge size below kappa");
        slot.edges.push(r);
    }
    Ok(BucketDecomposition {
        gamma: profile.gamma,
        kappa,
        large,
        buckets,
    })
}

/// Rounds of two-colorings covering one band of edges.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketCover {
    pub colorings: Vec<KFoldColoring>,
    pub rounds: usize,
    pub resamples: usize,
}

impl BucketCover {
    pub fn total_colors(&self) -> usize {
        2 * self.colorings.len()
    }
}

/// Default resampling cap: `10 * n * ceil(ln(gamma) + 1)` resample events.
pub fn default_resample_cap(n: usize, gamma: usize) -> usize {
    let g = (gamma.max(1) as f64).ln();
    10 * n.max(1) * (g + 1.0).ceil() as usize
}

/// Covers the receivers `edges` (all of size in `[k_i/2, k_i)`) with
/// `t = ceil(5 k_i ln gamma)` rounds of two-colorings, color 0 drawn with
/// probability `1/k_i`. While some edge is CF in no round, all rounds are
/// redrawn on that edge's vertices.
pub fn bucket_cover(
    inst: &PicodInstance,
    edges: &[usize],
    k_i: f64,
    gamma: usize,
    seed: u64,
    cap: usize,
) -> Result<BucketCover> {
    if edges.is_empty() {
        return Ok(BucketCover {
            colorings: Vec::new(),
            rounds: 0,
            resamples: 0,
        });
    }
    if (gamma as f64) <= std::f64::consts::E {
        return Err(Error::GammaTooSmall { gamma });
    }
    for &r in edges {
        let size = inst.edge(r).len() as f64;
        if !(k_i / 2.0 <= size && size < k_i) {
            return Err(Error::InvalidParameter(format!(
                "edge {r} of size {size} outside band [{}, {k_i})",
                k_i / 2.0
            )));
        }
    }
    let rounds = (5.0 * k_i * (gamma as f64).ln()).ceil() as usize;
    let q = 1.0 / k_i;
    let mut rounds_state = RoundBits::new(inst.m(), rounds, q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in 0..inst.m() {
        rounds_state.redraw(v, &mut rng);
    }
    let resamples = moser_tardos(inst, edges, cap, &mut rounds_state, &mut rng)?;
    let colorings = (0..rounds)
        .map(|t| {
            let colors: Vec<usize> = (0..inst.m())
                .map(|v| usize::from(!rounds_state.first_color(v, t)))
                .collect();
            KFoldColoring::from_colors(2, &colors).expect("two colors")
        })
        .collect();
    Ok(BucketCover {
        colorings,
        rounds,
        resamples,
    })
}

/// Per-vertex bitsets over rounds; bit set means the vertex got color 0.
struct RoundBits {
    rounds: usize,
    q: f64,
    words: usize,
    bits: Vec<u64>,
}

impl RoundBits {
    fn new(m: usize, rounds: usize, q: f64) -> Self {
        let words = rounds.div_ceil(64);
        Self {
            rounds,
            q,
            words,
            bits: vec![0; m * words],
        }
    }

    fn first_color(&self, v: usize, t: usize) -> bool {
        self.bits[v * self.words + t / 64] >> (t % 64) & 1 == 1
    }
}

impl Resample for RoundBits {
    fn redraw(&mut self, v: usize, rng: &mut ChaCha8Rng) {
        for t in 0..self.rounds {
            let w = v * self.words + t / 64;
            if rng.gen_bool(self.q) {
                self.bits[w] |= 1 << (t % 64);
            } else {
                self.bits[w] &= !(1 << (t % 64));
            }
        }
    }

    /// True when some round is CF for the edge: exactly one vertex has color 0,
    /// or exactly one has color 1.
    fn ok(&mut self, edge: &[usize]) -> bool {
        if edge.len() == 1 {
            return true;
        }
        for w in 0..self.words {
            let valid = if w + 1 == self.words && !self.rounds.is_multiple_of(64) {
                (1u64 << (self.rounds % 64)) - 1
            } else {
                u64::MAX
            };
            let (mut once0, mut multi0, mut once1, mut multi1) = (0u64, 0u64, 0u64, 0u64);
            for &v in edge {
                let b = self.bits[v * self.words + w];
                multi0 |= once0 & b;
                once0 |= b;
                multi1 |= once1 & !b;
                once1 |= !b;
            }
            if ((once0 & !multi0) | (once1 & !multi1)) & valid != 0 {
                return true;
            }
        }
        false
    }
}

/// Random state whose per-vertex variables can be redrawn.
trait Resample {
    /// True when the edge is no longer a bad event.
    fn ok(&mut self, edge: &[usize]) -> bool;
    fn redraw(&mut self, v: usize, rng: &mut ChaCha8Rng);
}

/// Resamples the variables of violated edges until none is violated.
/// Returns the number of resample events.
fn moser_tardos(
    inst: &PicodInstance,
    edges: &[usize],
    cap: usize,
    state: &mut impl Resample,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); inst.m()];
    for (i, &r) in edges.iter().enumerate() {
        for &v in inst.edge(r) {
            touching[v].push(i);
        }
    }
    let mut pending: Vec<usize> = (0..edges.len()).rev().collect();
    let mut queued = vec![true; edges.len()];
    let mut resamples = 0;
    while let Some(i) = pending.pop() {
        queued[i] = false;
        let edge = inst.edge(edges[i]);
        if state.ok(edge) {
            continue;
        }
        if resamples >= cap {
            return Err(Error::ResampleCapExceeded { attempts: resamples });
        }
        resamples += 1;
        for &v in edge {
            state.redraw(v, rng);
        }
        for &v in edge {
            for &j in &touching[v] {
                if !queued[j] {
                    queued[j] = true;
                    pending.push(j);
                }
            }
        }
    }
    Ok(resamples)
}

/// Knobs for [`build_log2_collection`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Log2Options {
    /// Constant in the large-edge palette `ceil(c0 * t * gamma^(1/t) * ln gamma)`.
    pub c0: f64,
    /// Resample events allowed per part; `None` uses [`default_resample_cap`].
    pub resample_cap: Option<usize>,
}

impl Default for Log2Options {
    fn default() -> Self {
        Self {
            c0: 4.0,
            resample_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Log2Collection {
    pub collection: ColoringCollection,
    pub gamma: usize,
    /// Palette of the large-edge coloring, 0 when that part is empty.
    pub large_colors: usize,
    /// `(threshold, colors)` for every nonempty band.
    pub bucket_colors: Vec<(f64, usize)>,
    pub resamples: usize,
    /// True when `gamma <= e` and the greedy coloring was used instead.
    pub fallback: bool,
}

/// Palette used for the large-edge part.
pub fn large_part_palette(gamma: usize, c0: f64) -> usize {
    let g = gamma as f64;
    let t = g.ln().ceil().max(1.0);
    (c0 * t * g.powf(1.0 / t) * g.ln()).ceil() as usize
}

/// Builds a verified CF collection whose size scales as `ln^2 gamma`.
pub fn build_log2_collection(inst: &PicodInstance, seed: u64, opts: Log2Options) -> Result<Log2Collection> {
    let profile = gamma(inst);
    if profile.kappa.is_none() {
        return Ok(Log2Collection {
            collection: ColoringCollection::singleton(greedy_cf_coloring(inst)),
            gamma: profile.gamma,
            large_colors: 0,
            bucket_colors: Vec::new(),
            resamples: 0,
            fallback: true,
        });
    }
    let g = profile.gamma;
    let cap = opts
        .resample_cap
        .unwrap_or_else(|| default_resample_cap(inst.n(), g));
    let parts = bucket_decomposition(inst)?;

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let large_seed: u64 = master.gen();
    let bucket_seeds: Vec<u64> = parts.buckets.iter().map(|_| master.gen()).collect();

    let mut colorings = Vec::new();
    let mut resamples = 0;
    let mut large_colors = 0;
    if !parts.large.is_empty() {
        let palette = large_part_palette(g, opts.c0);
        let (c, used) = uniform_cf_coloring(inst, &parts.large, palette, large_seed, cap)?;
        large_colors = palette;
        resamples += used;
        colorings.push(c);
    }

    let covers: Vec<Result<BucketCover>> = parts
        .buckets
        .par_iter()
        .zip(bucket_seeds.par_iter())
        .map(|(b, &s)| bucket_cover(inst, &b.edges, b.threshold, g, s, cap))
        .collect();
    let mut bucket_colors = Vec::new();
    for (b, cover) in parts.buckets.iter().zip(covers) {
        let cover = cover?;
        if cover.colorings.is_empty() {
            continue;
        }
        bucket_colors.push((b.threshold, cover.total_colors()));
        resamples += cover.resamples;
        colorings.extend(cover.colorings);
    }

    let collection = ColoringCollection::new(1, colorings)?;
    if let Some(edge) = inst
        .edges()
        .iter()
        .position(|e| covering_member(&collection, e).is_none())
    {
        return Err(Error::NotConflictFree { edge });
    }
    Ok(Log2Collection {
        collection,
        gamma: g,
        large_colors,
        bucket_colors,
        resamples,
        fallback: false,
    })
}

/// Uniform random coloring from `palette` colors, resampled until every
/// listed receiver's edge is CF.
fn uniform_cf_coloring(
    inst: &PicodInstance,
    edges: &[usize],
    palette: usize,
    seed: u64,
    cap: usize,
) -> Result<(KFoldColoring, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colors: Vec<usize> = (0..inst.m()).map(|_| rng.gen_range(0..palette)).collect();
    let mut state = UniformColors {
        palette,
        colors,
        seen: HashMap::new(),
    };
    let resamples = moser_tardos(inst, edges, cap, &mut state, &mut rng)?;
    let colors = state.colors;
    Ok((KFoldColoring::from_colors(palette, &colors)?, resamples))
}

struct UniformColors {
    palette: usize,
    colors: Vec<usize>,
    seen: HashMap<usize, u32>,
}

impl Resample for UniformColors {
    fn ok(&mut self, edge: &[usize]) -> bool {
        self.seen.clear();
        for &v in edge {
            *self.seen.entry(self.colors[v]).or_insert(0) += 1;
        }
        edge.len() == 1 || self.seen.values().any(|&n| n == 1)
    }

    fn redraw(&mut self, v: usize, rng: &mut ChaCha8Rng) {
        self.colors[v] = rng.gen_range(0..self.palette);
    }
}
