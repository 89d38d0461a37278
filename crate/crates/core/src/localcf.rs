//! Essential color sets and the local CF parameters.
//!
//! An edge is *satisfied* by a color set `D` under a coloring `C` when it has
//! a vertex `v` with `C(v) ⊆ D` and `C(v) ∩ C(v') = ∅` for every other vertex
//! `v'` of the edge. The quantifier over `v'` is read as "for all": `v` must
//! be a CF witness of the edge whose colors all lie in `D`. `D` is essential
//! when it satisfies every edge; then `Δ_{C,D}` is the largest number of
//! `D`-colors seen inside one edge, and that many rows suffice for a linear
//! code built from an MDS generator on `D`.
//!
//! The exhaustive searches use one reduction throughout: shrinking `D` to the
//! union of the color sets of a chosen witness per edge keeps every such edge
//! satisfied and never raises the edge counts. So it is enough to range over
//! sets of witness vertices instead of color subsets.

use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::collection::{cheapest_cover, ColoringCollection, MAX_COVER_EDGES};
use crate::coloring::search::{unique_colors, MAX_SEARCH_PALETTE};
use crate::coloring::{first_violation, for_each_canonical, BitColoring, ColorMask, KFoldColoring};
use crate::error::{Error, Result};
use crate::instance::PicodInstance;

/// Colorings with more distinct witness vertices than this use the greedy
/// shrink in [`min_delta_for_coloring`].
pub const EXHAUSTIVE_WITNESS_LIMIT: usize = 16;

const MERGE_NODE_LIMIT: usize = 1_000_000;

/// One color subset per member of a collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EssentialSelection {
    pub essential: Vec<Vec<usize>>,
}

impl EssentialSelection {
    pub fn new(mut essential: Vec<Vec<usize>>) -> Self {
        for d in &mut essential {
            d.sort_unstable();
            d.dedup();
        }
        Self { essential }
    }

    pub fn len(&self) -> usize {
        self.essential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.essential.is_empty()
    }
}

fn membership(c: &KFoldColoring, d: &[usize]) -> Result<Vec<bool>> {
    let mut in_d = vec![false; c.palette()];
    for &col in d {
        if col >= c.palette() {
            return Err(Error::InvalidParameter(format!(
                "color {col} outside palette of size {}",
                c.palette()
            )));
        }
        in_d[col] = true;
    }
    Ok(in_d)
}

/// All CF witnesses of `edge`, ascending by position in the edge.
pub fn witnesses(c: &KFoldColoring, edge: &[usize]) -> Vec<usize> {
    if edge.len() == 1 {
        return edge.to_vec();
    }
    let mut count: HashMap<usize, u32> = HashMap::new();
    for &v in edge {
        for &col in c.colors(v) {
            *count.entry(col).or_insert(0) += 1;
        }
    }
    edge.iter()
        .copied()
        .filter(|&v| c.colors(v).iter().all(|col| count[col] == 1))
        .collect()
}

fn edge_satisfied(c: &KFoldColoring, in_d: &[bool], edge: &[usize]) -> bool {
    witnesses(c, edge)
        .into_iter()
        .any(|w| c.colors(w).iter().all(|&col| in_d[col]))
}

fn edge_count(c: &KFoldColoring, in_d: &[bool], edge: &[usize]) -> usize {
    edge.iter()
        .flat_map(|&v| c.colors(v).iter().copied())
        .filter(|&col| in_d[col])
        .collect::<BTreeSet<_>>()
        .len()
}

/// Indices of the receivers whose edges are satisfied by `d`.
pub fn edges_satisfied(c: &KFoldColoring, d: &[usize], inst: &PicodInstance) -> Result<Vec<usize>> {
    c.check_domain(inst)?;
    let in_d = membership(c, d)?;
    Ok((0..inst.n())
        .filter(|&r| edge_satisfied(c, &in_d, inst.edge(r)))
        .collect())
}

/// `Δ_{C,D}`: the most `D`-colors inside any edge satisfied by `D`.
pub fn delta_of(c: &KFoldColoring, d: &[usize], inst: &PicodInstance) -> Result<usize> {
    let satisfied = edges_satisfied(c, d, inst)?;
    if satisfied.is_empty() {
        return Err(Error::NoSatisfiedEdges);
    }
    let in_d = membership(c, d)?;
    Ok(satisfied
        .iter()
        .map(|&r| edge_count(c, &in_d, inst.edge(r)))
        .max()
        .unwrap_or(0))
}

/// First receiver not satisfied by `d`, if any.
pub fn first_unsatisfied(c: &KFoldColoring, d: &[usize], inst: &PicodInstance) -> Result<Option<usize>> {
    c.check_domain(inst)?;
    let in_d = membership(c, d)?;
    Ok((0..inst.n()).find(|&r| !edge_satisfied(c, &in_d, inst.edge(r))))
}

pub fn is_essential(c: &KFoldColoring, d: &[usize], inst: &PicodInstance) -> Result<bool> {
    Ok(first_unsatisfied(c, d, inst)?.is_none())
}

/// Result of [`min_delta_for_coloring`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaChoice {
    pub delta: usize,
    pub essential: Vec<usize>,
    /// True when the greedy shrink was used; `delta` is then an upper bound.
    pub heuristic: bool,
}

/// `Δ_C` with a minimizing essential set. Ties go to the smaller set, then to
/// the lexicographically first one.
pub fn min_delta_for_coloring(c: &KFoldColoring, inst: &PicodInstance) -> Result<DeltaChoice> {
    if let Some(edge) = first_violation(c, inst)? {
        return Err(Error::NotConflictFree { edge });
    }
    if inst.n() == 0 {
        return Err(Error::NoSatisfiedEdges);
    }
    let per_edge: Vec<Vec<usize>> = inst.edges().iter().map(|e| witnesses(c, e)).collect();
    let pool: Vec<usize> = per_edge
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if pool.len() > EXHAUSTIVE_WITNESS_LIMIT {
        return Ok(greedy_shrink(c, inst));
    }

    let mut best: Option<(usize, Vec<usize>)> = None;
    for subset in 1u32..(1 << pool.len()) {
        let chosen: Vec<usize> = (0..pool.len())
            .filter(|i| subset >> i & 1 == 1)
            .map(|i| pool[i])
            .collect();
        if !per_edge.iter().all(|ws| ws.iter().any(|w| chosen.contains(w))) {
            continue;
        }
        let d: Vec<usize> = chosen
            .iter()
            .flat_map(|&v| c.colors(v).iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let in_d = membership(c, &d)?;
        let delta = inst
            .edges()
            .iter()
            .map(|e| edge_count(c, &in_d, e))
            .max()
            .unwrap_or(0);
        let better = match &best {
            None => true,
            Some((bd, bset)) => (delta, d.len(), &d) < (*bd, bset.len(), bset),
        };
        if better {
            best = Some((delta, d));
        }
    }
    let (delta, essential) = best.expect("the full witness pool is essential");
    Ok(DeltaChoice {
        delta,
        essential,
        heuristic: false,
    })
}

/// Starts from all used colors and repeatedly drops the color whose removal
/// keeps `D` essential and gives the smallest maximum edge count.
fn greedy_shrink(c: &KFoldColoring, inst: &PicodInstance) -> DeltaChoice {
    let mut in_d = vec![false; c.palette()];
    for col in c.used_colors() {
        in_d[col] = true;
    }
    let delta_for = |in_d: &[bool]| {
        inst.edges()
            .iter()
            .map(|e| edge_count(c, in_d, e))
            .max()
            .unwrap_or(0)
    };
    loop {
        let mut pick: Option<(usize, usize)> = None;
        for col in 0..c.palette() {
            if !in_d[col] {
                continue;
            }
            in_d[col] = false;
            if inst.edges().iter().all(|e| edge_satisfied(c, &in_d, e)) {
                let delta = delta_for(&in_d);
                if pick.is_none_or(|(best, _)| delta < best) {
                    pick = Some((delta, col));
                }
            }
            in_d[col] = true;
        }
        match pick {
            Some((_, col)) => in_d[col] = false,
            None => break,
        }
    }
    DeltaChoice {
        delta: delta_for(&in_d),
        essential: (0..c.palette()).filter(|&col| in_d[col]).collect(),
        heuristic: true,
    }
}

/// Witness vertices of each distinct edge under a bitmask coloring.
fn mask_witnesses(masks: &[ColorMask], edge: &[usize]) -> Vec<usize> {
    if edge.len() == 1 {
        return edge.to_vec();
    }
    let unique = unique_colors(masks, edge);
    edge.iter()
        .copied()
        .filter(|&v| masks[v] & !unique == 0)
        .collect()
}

/// Every witness-vertex set `S` of one coloring, summarized as
/// `(D = union of C(S), satisfied edges, Δ_{C,D})`.
struct WitnessSets<'a> {
    masks: &'a [ColorMask],
    edges: &'a [Vec<usize>],
    edge_colors: Vec<ColorMask>,
    witness: Vec<Vec<usize>>,
    pool: Vec<usize>,
}

impl<'a> WitnessSets<'a> {
    fn new(masks: &'a [ColorMask], edges: &'a [Vec<usize>]) -> Self {
        let witness: Vec<Vec<usize>> = edges.iter().map(|e| mask_witnesses(masks, e)).collect();
        let pool = witness
            .iter()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let edge_colors = edges
            .iter()
            .map(|e| e.iter().fold(0, |acc, &v| acc | masks[v]))
            .collect();
        Self {
            masks,
            edges,
            edge_colors,
            witness,
            pool,
        }
    }

    fn evaluate(&self, d: ColorMask) -> (u64, usize) {
        let mut covered = 0u64;
        let mut delta = 0;
        for (i, ws) in self.witness.iter().enumerate() {
            if ws.iter().any(|&w| self.masks[w] & !d == 0) {
                covered |= 1 << i;
                delta = delta.max((self.edge_colors[i] & d).count_ones() as usize);
            }
        }
        (covered, delta)
    }

    fn for_each(&self, mut f: impl FnMut(ColorMask, u64, usize)) {
        debug_assert!(self.pool.len() < 32 && self.edges.len() <= 64);
        for subset in 1u32..(1u32 << self.pool.len()) {
            let d = (0..self.pool.len())
                .filter(|i| subset >> i & 1 == 1)
                .fold(0, |acc, i| acc | self.masks[self.pool[i]]);
            let (covered, delta) = self.evaluate(d);
            f(d, covered, delta);
        }
    }
}

fn search_palette(
    inst: &PicodInstance,
    k: usize,
    budget: usize,
    edge_limit: usize,
) -> Result<(Vec<Vec<usize>>, usize)> {
    if k == 0 {
        return Err(Error::InvalidParameter("fold k must be at least 1".into()));
    }
    let (distinct, _) = inst.distinct_edges();
    if distinct.is_empty() {
        return Err(Error::NoSatisfiedEdges);
    }
    if distinct.len() > edge_limit {
        return Err(Error::TooLarge(format!(
            "{} distinct edges, limit {edge_limit}",
            distinct.len()
        )));
    }
    if inst.active_vertices().len() >= 32 {
        return Err(Error::TooLarge("32 or more active vertices".into()));
    }
    // a remapped optimum never needs more than k colors per active vertex
    let palette = budget
        .min(k * inst.active_vertices().len())
        .min(MAX_SEARCH_PALETTE);
    if palette < k {
        return Err(Error::InvalidParameter(format!("budget {budget} below fold {k}")));
    }
    Ok((distinct, palette))
}

fn mask_list(mask: ColorMask) -> Vec<usize> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

/// Optimum of a single-coloring search with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalOptimum {
    pub value: usize,
    pub coloring: KFoldColoring,
    pub essential: Vec<usize>,
}

fn best_essential(
    inst: &PicodInstance,
    k: usize,
    budget: usize,
    what: &'static str,
    score: impl Fn(ColorMask, usize) -> usize,
) -> Result<LocalOptimum> {
    let (distinct, palette) = search_palette(inst, k, budget, 64)?;
    let full = if distinct.len() == 64 {
        u64::MAX
    } else {
        (1u64 << distinct.len()) - 1
    };
    let mut best: Option<(usize, Vec<ColorMask>, ColorMask)> = None;
    for_each_canonical(inst, k, palette, true, |masks| {
        let sets = WitnessSets::new(masks, &distinct);
        sets.for_each(|d, covered, delta| {
            if covered != full {
                return;
            }
            let value = score(d, delta);
            if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
                best = Some((value, masks.to_vec(), d));
            }
        });
        ControlFlow::Continue(())
    })?;
    let Some((value, masks, d)) = best else {
        return Err(Error::LimitExceeded { what, limit: budget });
    };
    let coloring = BitColoring { k, palette, masks }.to_coloring();
    Ok(LocalOptimum {
        value,
        coloring,
        essential: mask_list(d),
    })
}

/// `Δ_k`: the least `Δ_{C,D}` over k-fold CF colorings with at most `budget`
/// colors and their essential sets. Exact once `budget >= k * (active vertices)`.
pub fn exact_delta_k(inst: &PicodInstance, k: usize, budget: usize) -> Result<LocalOptimum> {
    best_essential(
        inst,
        k,
        budget,
        "local conflict-free chromatic number",
        |_, delta| delta,
    )
}

/// Least `|D|` over k-fold CF colorings with at most `budget` colors and their essential sets.
pub fn min_essential_size(inst: &PicodInstance, k: usize, budget: usize) -> Result<LocalOptimum> {
    best_essential(inst, k, budget, "essential set size", |d, _| {
        d.count_ones() as usize
    })
}

/// Optimum of the collection search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaOptimum {
    pub lambda: usize,
    pub collection: ColoringCollection,
    pub selection: EssentialSelection,
}

/// `λ_k`: the least `Σ_p Δ_{C^p, D_p}` over collections of k-fold colorings
/// (each with at most `budget` colors) and color sets `D_p` whose satisfied
/// edges jointly cover the instance.
pub fn exact_lambda_k(inst: &PicodInstance, k: usize, budget: usize) -> Result<LambdaOptimum> {
    let (distinct, palette) = search_palette(inst, k, budget, MAX_COVER_EDGES)?;
    let full = (1u32 << distinct.len()) - 1;
    let mut best: HashMap<u32, (usize, Vec<ColorMask>, ColorMask)> = HashMap::new();
    for_each_canonical(inst, k, palette, false, |masks| {
        let sets = WitnessSets::new(masks, &distinct);
        sets.for_each(|d, covered, delta| {
            if covered == 0 {
                return;
            }
            let covered = covered as u32;
            match best.get(&covered) {
                Some((cost, _, _)) if *cost <= delta => {}
                _ => {
                    best.insert(covered, (delta, masks.to_vec(), d));
                }
            }
        });
        ControlFlow::Continue(())
    })?;
    let items: Vec<(u32, usize)> = best.iter().map(|(&m, (c, _, _))| (m, *c)).collect();
    let Some((lambda, picks)) = cheapest_cover(&items, full) else {
        return Err(Error::LimitExceeded {
            what: "local conflict-free covering number",
            limit: budget,
        });
    };
    let mut colorings = Vec::new();
    let mut essential = Vec::new();
    for mask in picks {
        let (_, masks, d) = &best[&mask];
        colorings.push(
            BitColoring {
                k,
                palette,
                masks: masks.clone(),
            }
            .to_coloring(),
        );
        essential.push(mask_list(*d));
    }
    Ok(LambdaOptimum {
        lambda,
        collection: ColoringCollection::new(k, colorings)?,
        selection: EssentialSelection::new(essential),
    })
}

/// Recolors `c` onto `|D| + k` colors: colors of `D` become `0..|D|` in
/// order, every other color is replaced by the fresh block `|D|..|D|+k`
/// (taking as many block colors as needed to keep `k` per vertex). The image
/// of `D` stays essential, so the output is CF.
pub fn remap_to_essential(
    c: &KFoldColoring,
    d: &[usize],
    inst: &PicodInstance,
) -> Result<(KFoldColoring, Vec<usize>)> {
    if let Some(edge) = first_unsatisfied(c, d, inst)? {
        return Err(Error::NotEssential { edge });
    }
    let d: Vec<usize> = d.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let rank: HashMap<usize, usize> = d.iter().enumerate().map(|(i, &col)| (col, i)).collect();
    let k = c.k();
    let assign = c
        .assignment()
        .iter()
        .map(|set| {
            let mut out: Vec<usize> = set.iter().filter_map(|col| rank.get(col).copied()).collect();
            let missing = k - out.len();
            out.extend(d.len()..d.len() + missing);
            out
        })
        .collect();
    let remapped = KFoldColoring::new(k, d.len() + k, assign)?;
    Ok((remapped, (0..d.len()).collect()))
}

fn check_cover(
    col: &ColoringCollection,
    sel: &EssentialSelection,
    inst: &PicodInstance,
) -> Result<Vec<Vec<bool>>> {
    if col.len() != sel.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} colorings but {} essential sets",
            col.len(),
            sel.len()
        )));
    }
    let member_in_d = col
        .colorings()
        .iter()
        .zip(&sel.essential)
        .map(|(c, d)| {
            c.check_domain(inst)?;
            membership(c, d)
        })
        .collect::<Result<Vec<_>>>()?;
    for (r, edge) in inst.edges().iter().enumerate() {
        let covered = col
            .colorings()
            .iter()
            .zip(&member_in_d)
            .any(|(c, in_d)| edge_satisfied(c, in_d, edge));
        if !covered {
            return Err(Error::NotACover { edge: r });
        }
    }
    Ok(member_in_d)
}

/// Output of [`merge_collection`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedColoring {
    pub coloring: KFoldColoring,
    pub essential: Vec<usize>,
    /// Member chosen for every vertex; `None` means the fresh block.
    pub source: Vec<Option<usize>>,
    /// False when the smallest-member rule already worked.
    pub searched: bool,
}

/// Folds a collection with an essential cover into one coloring.
///
/// The `D_p` are relabeled onto consecutive disjoint ranges in member order
/// and a fresh block of `k` colors sits on top. A vertex keeps `C^p(v)` for
/// some member with `C^p(v) ⊆ D_p`, or gets the block. Any such choice keeps
/// `Δ_{C,D} <= Σ_p Δ_{C^p,D_p}` for `D` the union of the relabeled sets.
/// The smallest eligible member is tried first; it can leave an edge whose
/// only witnesses were routed to other members, so on failure the choices
/// are searched until every edge is satisfied by `D`.
pub fn merge_collection(
    col: &ColoringCollection,
    sel: &EssentialSelection,
    inst: &PicodInstance,
) -> Result<MergedColoring> {
    let member_in_d = check_cover(col, sel, inst)?;
    let k = col.k();
    let mut offsets = Vec::with_capacity(sel.len());
    let mut total = 0;
    for d in &sel.essential {
        offsets.push(total);
        total += d.len();
    }
    let relabel = |p: usize, v: usize| -> Vec<usize> {
        let d = &sel.essential[p];
        col.colorings()[p]
            .colors(v)
            .iter()
            .map(|c| offsets[p] + d.binary_search(c).expect("color inside D_p"))
            .collect()
    };
    let m = inst.m();
    let options: Vec<Vec<Option<usize>>> = (0..m)
        .map(|v| {
            let mut opts: Vec<Option<usize>> = (0..col.len())
                .filter(|&p| col.colorings()[p].colors(v).iter().all(|&c| member_in_d[p][c]))
                .map(Some)
                .collect();
            opts.push(None);
            opts
        })
        .collect();
    let block: Vec<usize> = (total..total + k).collect();
    let build = |choice: &[Option<usize>]| -> KFoldColoring {
        let assign = choice
            .iter()
            .enumerate()
            .map(|(v, p)| match p {
                Some(p) => relabel(*p, v),
                None => block.clone(),
            })
            .collect();
        KFoldColoring::new(k, total + k, assign).expect("merged sets have k colors")
    };
    let essential: Vec<usize> = (0..total).collect();

    let first: Vec<Option<usize>> = options.iter().map(|o| o[0]).collect();
    let merged = build(&first);
    let Some(failing) = first_unsatisfied(&merged, &essential, inst)? else {
        return Ok(MergedColoring {
            coloring: merged,
            essential,
            source: first,
            searched: false,
        });
    };

    // DFS over vertex choices; an edge is checked once its last vertex is set
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (r, e) in inst.edges().iter().enumerate() {
        closing[*e.last().expect("nonempty edge")].push(r);
    }
    let mut choice = first.clone();
    let mut colors: Vec<Vec<usize>> = (0..m)
        .map(|v| match choice[v] {
            Some(p) => relabel(p, v),
            None => block.clone(),
        })
        .collect();
    let mut nodes = 0usize;
    let found = merge_dfs(
        0,
        &options,
        &closing,
        inst,
        total,
        &mut choice,
        &mut colors,
        &mut nodes,
        &|p, v| match p {
            Some(p) => relabel(p, v),
            None => block.clone(),
        },
    )?;
    if !found {
        return Err(Error::NotConflictFree { edge: failing });
    }
    Ok(MergedColoring {
        coloring: build(&choice),
        essential,
        source: choice,
        searched: true,
    })
}

#[allow(clippy::too_many_arguments)]
fn merge_dfs(
    v: usize,
    options: &[Vec<Option<usize>>],
    closing: &[Vec<usize>],
    inst: &PicodInstance,
    total: usize,
    choice: &mut Vec<Option<usize>>,
    colors: &mut Vec<Vec<usize>>,
    nodes: &mut usize,
    colors_for: &dyn Fn(Option<usize>, usize) -> Vec<usize>,
) -> Result<bool> {
    if v == options.len() {
        return Ok(true);
    }
    for &opt in &options[v] {
        *nodes += 1;
        if *nodes > MERGE_NODE_LIMIT {
            return Err(Error::LimitExceeded {
                what: "merge choice search",
                limit: MERGE_NODE_LIMIT,
            });
        }
        choice[v] = opt;
        colors[v] = colors_for(opt, v);
        let ok = closing[v]
            .iter()
            .all(|&r| satisfied_by_low(colors, inst.edge(r), total));
        if ok
            && merge_dfs(
                v + 1,
                options,
                closing,
                inst,
                total,
                choice,
                colors,
                nodes,
                colors_for,
            )?
        {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Edge has a witness whose colors are all below `total` (outside the block).
fn satisfied_by_low(colors: &[Vec<usize>], edge: &[usize], total: usize) -> bool {
    if edge.len() == 1 {
        return colors[edge[0]].iter().all(|&c| c < total);
    }
    let mut count: HashMap<usize, u32> = HashMap::new();
    for &v in edge {
        for &c in &colors[v] {
            *count.entry(c).or_insert(0) += 1;
        }
    }
    edge.iter()
        .any(|&v| colors[v].iter().all(|c| *c < total && count[c] == 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collection::binary_collection;
    use crate::coloring::{exact_chi_cf, is_cf};
    use crate::instance::{complete_two_uniform, ex2, pentagon, random_instance};

    fn ex2_coloring() -> KFoldColoring {
        KFoldColoring::from_colors(2, &[0, 0, 0, 0, 1, 1, 1, 1]).unwrap()
    }

    fn single_edge() -> PicodInstance {
        PicodInstance::new(2, vec![vec![0, 1]]).unwrap()
    }

    #[test]
    fn satisfied_edges_basic() {
        let c = ex2_coloring();
        let inst = ex2();
        assert_eq!(
            edges_satisfied(&c, &[0, 1], &inst).unwrap(),
            (0..8).collect::<Vec<_>>()
        );
        assert!(edges_satisfied(&c, &[], &inst).unwrap().is_empty());
        assert!(edges_satisfied(&c, &[2], &inst).is_err());
    }

    #[test]
    fn ex2_color_zero_witnesses() {
        // brute force: edges whose color-0 vertices number exactly one
        let c = ex2_coloring();
        let inst = ex2();
        let expected: Vec<usize> = (0..inst.n())
            .filter(|&r| inst.edge(r).iter().filter(|&&v| c.colors(v)[0] == 0).count() == 1)
            .collect();
        assert_eq!(edges_satisfied(&c, &[0], &inst).unwrap(), expected);
        let r = inst.edges().iter().position(|e| e == &vec![1, 4, 5, 6]).unwrap();
        assert!(expected.contains(&r));
    }

    #[test]
    fn delta_single_edge() {
        let c = KFoldColoring::from_colors(2, &[0, 1]).unwrap();
        assert_eq!(delta_of(&c, &[0, 1], &single_edge()).unwrap(), 2);
        assert_eq!(delta_of(&c, &[0], &single_edge()).unwrap(), 1);
        assert!(matches!(
            delta_of(&c, &[], &single_edge()),
            Err(Error::NoSatisfiedEdges)
        ));
        let choice = min_delta_for_coloring(&c, &single_edge()).unwrap();
        assert_eq!((choice.delta, choice.essential), (1, vec![0]));
    }

    #[test]
    fn delta_complete_two_uniform() {
        for m in 3..=7 {
            let inst = complete_two_uniform(m).unwrap();
            let c = KFoldColoring::all_distinct(m);
            let all: Vec<usize> = (0..m).collect();
            assert_eq!(delta_of(&c, &all, &inst).unwrap(), 2);
            assert_eq!(min_delta_for_coloring(&c, &inst).unwrap().delta, 2);
        }
        let inst = complete_two_uniform(10).unwrap();
        let choice = min_delta_for_coloring(&KFoldColoring::all_distinct(10), &inst).unwrap();
        assert_eq!(choice.delta, 2);
        assert!(is_essential(&KFoldColoring::all_distinct(10), &choice.essential, &inst).unwrap());
    }

    #[test]
    fn ex2_min_delta() {
        let choice = min_delta_for_coloring(&ex2_coloring(), &ex2()).unwrap();
        assert_eq!(choice.delta, 2);
        assert_eq!(choice.essential, vec![0, 1]);
        assert!(!choice.heuristic);
        assert!(!is_essential(&ex2_coloring(), &[0], &ex2()).unwrap());
        assert!(!is_essential(&ex2_coloring(), &[1], &ex2()).unwrap());
    }

    #[test]
    fn min_delta_rejects_non_cf() {
        let c = KFoldColoring::from_colors(1, &[0, 0]).unwrap();
        assert!(matches!(
            min_delta_for_coloring(&c, &single_edge()),
            Err(Error::NotConflictFree { edge: 0 })
        ));
    }

    #[test]
    fn greedy_shrink_on_large_pool() {
        let inst = complete_two_uniform(20).unwrap();
        let c = KFoldColoring::all_distinct(20);
        let choice = min_delta_for_coloring(&c, &inst).unwrap();
        assert!(choice.heuristic);
        assert!(is_essential(&c, &choice.essential, &inst).unwrap());
        assert_eq!(choice.delta, delta_of(&c, &choice.essential, &inst).unwrap());
        assert_eq!(choice.delta, 2);
    }

    #[test]
    fn exact_delta_values() {
        assert_eq!(
            exact_delta_k(&complete_two_uniform(4).unwrap(), 1, 8)
                .unwrap()
                .value,
            2
        );
        assert_eq!(exact_delta_k(&single_edge(), 1, 4).unwrap().value, 1);
        let pent = exact_delta_k(&pentagon(), 1, 5).unwrap();
        assert!(pent.value <= 3);
        assert!(is_cf(&pent.coloring, &pentagon()).unwrap());
        assert!(is_essential(&pent.coloring, &pent.essential, &pentagon()).unwrap());
        assert_eq!(
            delta_of(&pent.coloring, &pent.essential, &pentagon()).unwrap(),
            pent.value
        );
    }

    #[test]
    fn exact_lambda_values() {
        assert_eq!(
            exact_lambda_k(&complete_two_uniform(4).unwrap(), 1, 8)
                .unwrap()
                .lambda,
            2
        );
        assert_eq!(exact_lambda_k(&single_edge(), 1, 4).unwrap().lambda, 1);
        let l = exact_lambda_k(&pentagon(), 1, 5).unwrap();
        assert_eq!(l.lambda, exact_delta_k(&pentagon(), 1, 5).unwrap().value);
        let sum: usize = l
            .collection
            .colorings()
            .iter()
            .zip(&l.selection.essential)
            .map(|(c, d)| delta_of(c, d, &pentagon()).unwrap())
            .sum();
        assert_eq!(sum, l.lambda);
    }

    #[test]
    fn remap_keeps_cf() {
        let (c, d) = remap_to_essential(&ex2_coloring(), &[0, 1], &ex2()).unwrap();
        assert_eq!(c.palette(), 3);
        assert!(is_essential(&c, &d, &ex2()).unwrap());
        assert!(matches!(
            remap_to_essential(&ex2_coloring(), &[0], &ex2()),
            Err(Error::NotEssential { .. })
        ));
        let inst = complete_two_uniform(5).unwrap();
        let c = KFoldColoring::all_distinct(5);
        let choice = min_delta_for_coloring(&c, &inst).unwrap();
        let (r, d) = remap_to_essential(&c, &choice.essential, &inst).unwrap();
        assert!(is_cf(&r, &inst).unwrap());
        assert_eq!(r.palette(), choice.essential.len() + 1);
        assert!(is_essential(&r, &d, &inst).unwrap());
    }

    #[test]
    fn merge_single_member() {
        let col = ColoringCollection::singleton(ex2_coloring());
        let sel = EssentialSelection::new(vec![vec![0, 1]]);
        let out = merge_collection(&col, &sel, &ex2()).unwrap();
        assert!(!out.searched);
        assert_eq!(
            delta_of(&out.coloring, &out.essential, &ex2()).unwrap(),
            delta_of(&ex2_coloring(), &[0, 1], &ex2()).unwrap()
        );
    }

    #[test]
    fn merge_binary_collection() {
        let inst = complete_two_uniform(4).unwrap();
        let col = binary_collection(4).unwrap();
        let sel = EssentialSelection::new(vec![vec![0, 1], vec![0, 1]]);
        let out = merge_collection(&col, &sel, &inst).unwrap();
        // every vertex prefers member 0, which repeats colors on {0, 2}
        assert!(out.searched);
        assert!(is_cf(&out.coloring, &inst).unwrap());
        assert!(is_essential(&out.coloring, &out.essential, &inst).unwrap());
        assert!(delta_of(&out.coloring, &out.essential, &inst).unwrap() <= 4);
    }

    #[test]
    fn merge_smallest_member_rule_gap() {
        // w = 0 is the witness of {0, 2} in member 0 and of {0, 1} in member 1,
        // but the smallest-member rule sends both 0 and 1 to member 0
        let inst = PicodInstance::new(3, vec![vec![0, 1], vec![0, 2]]).unwrap();
        let a = KFoldColoring::from_colors(2, &[0, 0, 1]).unwrap();
        let b = KFoldColoring::from_colors(2, &[0, 1, 0]).unwrap();
        let col = ColoringCollection::new(1, vec![a, b]).unwrap();
        let sel = EssentialSelection::new(vec![vec![0, 1], vec![0]]);
        let out = merge_collection(&col, &sel, &inst).unwrap();
        assert!(out.searched);
        assert!(is_essential(&out.coloring, &out.essential, &inst).unwrap());
    }

    #[test]
    fn merge_rejects_non_cover() {
        let col = ColoringCollection::singleton(ex2_coloring());
        let sel = EssentialSelection::new(vec![vec![0]]);
        assert!(matches!(
            merge_collection(&col, &sel, &ex2()),
            Err(Error::NotACover { .. })
        ));
        let sel = EssentialSelection::new(vec![]);
        assert!(matches!(
            merge_collection(&col, &sel, &ex2()),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn selection_json_shape() {
        let sel = EssentialSelection::new(vec![vec![1, 0], vec![2]]);
        assert_eq!(
            serde_json::to_string(&sel).unwrap(),
            r#"{"essential":[[0,1],[2]]}"#
        );
    }

    #[test]
    fn essential_size_bounds_small() {
        for seed in 0..10 {
            let inst = random_instance(5, 4, (2, 3), seed).unwrap();
            for k in 1..=2 {
                let budget = k * 5;
                let (chi, _) = exact_chi_cf(&inst, k, budget).unwrap();
                let d = min_essential_size(&inst, k, budget).unwrap();
                assert!(chi - k <= d.value && d.value <= chi, "seed {seed} k {k}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn delta_at_most_essential_size(seed in 0u64..300) {
            let inst = random_instance(7, 8, (1, 5), seed).unwrap();
            let c = crate::coloring::greedy_cf_coloring(&inst);
            let choice = min_delta_for_coloring(&c, &inst).unwrap();
            proptest::prop_assert!(choice.delta <= choice.essential.len());
            proptest::prop_assert!(is_essential(&c, &choice.essential, &inst).unwrap());
            let all = c.used_colors();
            proptest::prop_assert!(choice.delta <= delta_of(&c, &all, &inst).unwrap());
        }

        #[test]
        fn satisfied_grows_with_d(seed in 0u64..300, bits in 0u32..64) {
            let inst = random_instance(6, 6, (1, 4), seed).unwrap();
            let c = crate::coloring::greedy_cf_coloring(&inst);
            let small: Vec<usize> = (0..c.palette()).filter(|b| bits >> b & 1 == 1).collect();
            let big: Vec<usize> = (0..c.palette()).collect();
            let s = edges_satisfied(&c, &small, &inst).unwrap();
            let b = edges_satisfied(&c, &big, &inst).unwrap();
            proptest::prop_assert!(s.iter().all(|r| b.contains(r)));
        }
    }
}
