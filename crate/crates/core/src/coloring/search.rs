//! Exhaustive enumeration of k-fold colorings up to palette permutation.
//!
//! Colorings are canonical: walking the vertices in order, the colors a
//! vertex introduces for the first time are always the smallest unused
//! indices. Every coloring with at most `L` colors is a palette permutation
//! of exactly one canonical coloring. Vertices outside every edge do not
//! affect any edge and are pinned to colors `0..k`.

use std::ops::ControlFlow;

use crate::coloring::KFoldColoring;
use crate::error::{Error, Result};
use crate::instance::PicodInstance;

pub(crate) type ColorMask = u64;

/// Palette limit of the bitmask representation.
pub(crate) const MAX_SEARCH_PALETTE: usize = 64;

/// A k-fold coloring stored as one color bitmask per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitColoring {
    pub k: usize,
    pub palette: usize,
    pub masks: Vec<ColorMask>,
}

impl BitColoring {
    pub fn to_coloring(&self) -> KFoldColoring {
        let assign = self.masks.iter().map(|&mask| mask_colors(mask)).collect();
        KFoldColoring::new(self.k, self.palette, assign).expect("canonical masks are valid k-sets")
    }
}

pub(crate) fn mask_colors(mut mask: ColorMask) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros() as usize);
        mask &= mask - 1;
    }
    out
}

/// Mask of colors that occur on exactly one vertex of `edge`.
#[inline]
pub(crate) fn unique_colors(masks: &[ColorMask], edge: &[usize]) -> ColorMask {
    let mut once = 0;
    let mut multi = 0;
    for &v in edge {
        multi |= once & masks[v];
        once |= masks[v];
    }
    once & !multi
}

/// First vertex whose whole color set is unique within the edge.
#[inline]
pub(crate) fn mask_witness(masks: &[ColorMask], edge: &[usize]) -> Option<usize> {
    if edge.len() == 1 {
        return Some(edge[0]);
    }
    let unique = unique_colors(masks, edge);
    edge.iter().copied().find(|&v| masks[v] & !unique == 0)
}

#[inline]
pub(crate) fn mask_edge_cf(masks: &[ColorMask], edge: &[usize]) -> bool {
    mask_witness(masks, edge).is_some()
}

/// Visits every canonical k-fold coloring of `inst` with at most `palette`
/// colors, optionally only those that are CF. Visiting order is lexicographic
/// in the per-vertex sorted color lists.
pub(crate) fn for_each_canonical<F>(
    inst: &PicodInstance,
    k: usize,
    palette: usize,
    cf_only: bool,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&[ColorMask]) -> ControlFlow<()>,
{
    if k == 0 || k > palette {
        return Err(Error::InvalidParameter(format!(
            "fold {k} incompatible with palette {palette}"
        )));
    }
    if palette > MAX_SEARCH_PALETTE || k >= MAX_SEARCH_PALETTE {
        return Err(Error::TooLarge(format!(
            "palette {palette} exceeds {MAX_SEARCH_PALETTE}"
        )));
    }
    let order = inst.active_vertices();
    let mut position = vec![usize::MAX; inst.m()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let (distinct, _) = inst.distinct_edges();
    let mut closing: Vec<Vec<Vec<usize>>> = vec![Vec::new(); order.len()];
    if cf_only {
        for edge in distinct.into_iter().filter(|e| e.len() > 1) {
            let last = edge.iter().map(|&v| position[v]).max().expect("nonempty edge");
            closing[last].push(edge);
        }
    }
    let options: Vec<Vec<ColorMask>> = (0..=palette).map(|used| options_for(k, palette, used)).collect();
    let base = (1u64 << k) - 1;
    let mut masks = vec![base; inst.m()];
    let mut state = Dfs {
        order: &order,
        closing: &closing,
        options: &options,
        masks: &mut masks,
        visit: &mut visit,
    };
    let _ = state.descend(0, 0);
    Ok(())
}

struct Dfs<'a, F> {
    order: &'a [usize],
    closing: &'a [Vec<Vec<usize>>],
    options: &'a [Vec<ColorMask>],
    masks: &'a mut Vec<ColorMask>,
    visit: &'a mut F,
}

impl<F: FnMut(&[ColorMask]) -> ControlFlow<()>> Dfs<'_, F> {
    fn descend(&mut self, depth: usize, used: usize) -> ControlFlow<()> {
        if depth == self.order.len() {
            return (self.visit)(self.masks);
        }
        let v = self.order[depth];
        for &opt in &self.options[used] {
            self.masks[v] = opt;
            if self.closing[depth].iter().all(|e| mask_edge_cf(self.masks, e)) {
                let top = 64 - opt.leading_zeros() as usize;
                self.descend(depth + 1, used.max(top))?;
            }
        }
        ControlFlow::Continue(())
    }
}

/// All k-sets made of some already-used colors plus the next fresh ones,
/// sorted lexicographically.
fn options_for(k: usize, palette: usize, used: usize) -> Vec<ColorMask> {
    let mut out = Vec::new();
    for fresh in 0..=k {
        let old = k - fresh;
        if old > used || used + fresh > palette {
            continue;
        }
        let fresh_mask = if fresh == 0 {
            0
        } else {
            ((1u64 << fresh) - 1) << used
        };
        for_each_subset(used, old, &mut |sub| out.push(sub | fresh_mask));
    }
    out.sort_by_key(|&m| mask_colors(m));
    out
}

fn for_each_subset(n: usize, size: usize, f: &mut dyn FnMut(ColorMask)) {
    fn rec(start: usize, n: usize, left: usize, acc: ColorMask, f: &mut dyn FnMut(ColorMask)) {
        if left == 0 {
            f(acc);
            return;
        }
        for i in start..n {
            if n - i < left {
                break;
            }
            rec(i + 1, n, left - 1, acc | 1 << i, f);
        }
    }
    rec(0, n, size, 0, f);
}

/// Smallest palette `L <= l_max` admitting a k-fold CF coloring, with the
/// lexicographically first canonical witness.
pub fn exact_chi_cf(inst: &PicodInstance, k: usize, l_max: usize) -> Result<(usize, KFoldColoring)> {
    if k == 0 {
        return Err(Error::InvalidParameter("fold k must be at least 1".into()));
    }
    for palette in k..=l_max {
        let mut found = None;
        for_each_canonical(inst, k, palette, true, |masks| {
            found = Some(masks.to_vec());
            ControlFlow::Break(())
        })?;
        if let Some(masks) = found {
            let c = BitColoring { k, palette, masks }.to_coloring();
            return Ok((palette, c));
        }
    }
    Err(Error::LimitExceeded {
        what: "conflict-free chromatic number",
        limit: l_max,
    })
}
