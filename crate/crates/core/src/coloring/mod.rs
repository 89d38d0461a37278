//! k-fold colorings and conflict-freeness.
//!
//! A k-fold coloring gives every vertex a set of exactly `k` distinct colors
//! from a palette `0..L`. It is conflict-free (CF) for an edge when some
//! vertex of the edge has a color set disjoint from the color sets of all
//! other vertices of that edge. Singleton edges are CF under every coloring.

pub(crate) mod search;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use search::exact_chi_cf;
pub(crate) use search::{for_each_canonical, BitColoring, ColorMask};

use crate::error::{Error, Result};
use crate::instance::PicodInstance;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct KFoldColoring {
    k: usize,
    #[serde(rename = "L")]
    palette: usize,
    assign: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawColoring {
    k: usize,
    #[serde(rename = "L")]
    palette: usize,
    assign: Vec<Vec<usize>>,
}

impl<'de> Deserialize<'de> for KFoldColoring {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawColoring::deserialize(de)?;
        KFoldColoring::new(raw.k, raw.palette, raw.assign).map_err(serde::de::Error::custom)
    }
}

impl KFoldColoring {
    /// Validates and normalizes (sorts) every vertex's color set.
    pub fn new(k: usize, palette: usize, mut assign: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidColoring("fold k must be at least 1".into()));
        }
        if k > palette {
            return Err(Error::InvalidColoring(format!(
                "fold {k} exceeds palette size {palette}"
            )));
        }
        for (v, set) in assign.iter_mut().enumerate() {
            set.sort_unstable();
            set.dedup();
            if set.len() != k {
                return Err(Error::InvalidColoring(format!(
                    "vertex {v} has {} distinct colors, expected {k}",
                    set.len()
                )));
            }
            if let Some(&c) = set.last().filter(|&&c| c >= palette) {
                return Err(Error::InvalidColoring(format!(
                    "vertex {v} uses color {c} outside palette of size {palette}"
                )));
            }
        }
        Ok(Self { k, palette, assign })
    }

    /// 1-fold coloring from one color per vertex.
    pub fn from_colors(palette: usize, colors: &[usize]) -> Result<Self> {
        Self::new(1, palette, colors.iter().map(|&c| vec![c]).collect())
    }

    /// Every vertex gets its own color.
    pub fn all_distinct(m: usize) -> Self {
        Self {
            k: 1,
            palette: m,
            assign: (0..m).map(|v| vec![v]).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn palette(&self) -> usize {
        self.palette
    }

    pub fn num_vertices(&self) -> usize {
        self.assign.len()
    }

    pub fn colors(&self, v: usize) -> &[usize] {
        &self.assign[v]
    }

    pub fn assignment(&self) -> &[Vec<usize>] {
        &self.assign
    }

    /// Number of distinct colors actually used.
    pub fn used_colors(&self) -> Vec<usize> {
        let mut used: Vec<usize> = self.assign.iter().flatten().copied().collect();
        used.sort_unstable();
        used.dedup();
        used
    }

    /// Relabels colors by first occurrence in vertex order and shrinks the
    /// palette to the number of colors used.
    pub fn compacted(&self) -> KFoldColoring {
        let mut map = HashMap::new();
        let assign: Vec<Vec<usize>> = self
            .assign
            .iter()
            .map(|set| {
                let mut out: Vec<usize> = set
                    .iter()
                    .map(|c| {
                        let next = map.len();
                        *map.entry(*c).or_insert(next)
                    })
                    .collect();
                out.sort_unstable();
                out
            })
            .collect();
        KFoldColoring {
            k: self.k,
            palette: map.len().max(self.k),
            assign,
        }
    }

    pub(crate) fn check_domain(&self, inst: &PicodInstance) -> Result<()> {
        if self.assign.len() != inst.m() {
            return Err(Error::DomainMismatch {
                expected: inst.m(),
                found: self.assign.len(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("coloring serialization cannot fail")
    }
}

/// First vertex (ascending) of `edge` whose color set is disjoint from all
/// others in the edge.
pub fn cf_witness(c: &KFoldColoring, edge: &[usize]) -> Option<usize> {
    if edge.len() == 1 {
        return Some(edge[0]);
    }
    let mut count: HashMap<usize, u32> = HashMap::with_capacity(edge.len() * c.k);
    for &v in edge {
        for &col in c.colors(v) {
            *count.entry(col).or_insert(0) += 1;
        }
    }
    // a vertex's own colors are distinct, so count 1 means nobody else has it
    edge.iter()
        .copied()
        .find(|&v| c.colors(v).iter().all(|col| count[col] == 1))
}

pub fn is_cf_for_edge(c: &KFoldColoring, edge: &[usize]) -> bool {
    cf_witness(c, edge).is_some()
}

pub fn is_cf(c: &KFoldColoring, inst: &PicodInstance) -> Result<bool> {
    c.check_domain(inst)?;
    Ok(inst.edges().iter().all(|e| is_cf_for_edge(c, e)))
}

/// Index of the first edge not made CF by `c`.
pub fn first_violation(c: &KFoldColoring, inst: &PicodInstance) -> Result<Option<usize>> {
    c.check_domain(inst)?;
    Ok(inst.edges().iter().position(|e| !is_cf_for_edge(c, e)))
}

/// Replaces color `j` of a 1-fold coloring by the block `{kj, .., kj+k-1}`.
pub fn expand_to_kfold(c: &KFoldColoring, k: usize) -> Result<KFoldColoring> {
    if c.k() != 1 {
        return Err(Error::InvalidColoring(format!(
            "expansion needs a 1-fold coloring, got fold {}",
            c.k()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("fold k must be at least 1".into()));
    }
    let assign = c
        .assignment()
        .iter()
        .map(|set| (k * set[0]..k * set[0] + k).collect())
        .collect();
    KFoldColoring::new(k, k * c.palette(), assign)
}

/// Deterministic greedy 1-fold CF coloring.
///
/// Vertices are taken in decreasing incidence order (ties by label). Each
/// vertex gets the color, among the used ones plus one fresh color, that
/// maximizes the number of its edges whose colored part is CF; ties go to the
/// smallest color. Edges left non-CF are repaired by giving one of their
/// vertices a fresh color, which never breaks another edge. The palette is
/// compacted at the end, so `L <= m`.
pub fn greedy_cf_coloring(inst: &PicodInstance) -> KFoldColoring {
    let m = inst.m();
    let inc = inst.incidence();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(inc[v].len()), v));

    const NONE: usize = usize::MAX;
    let mut color = vec![NONE; m];
    let mut used = 0usize;
    for &v in &order {
        let mut best = (0usize, 0usize);
        for cand in 0..=used {
            color[v] = cand;
            let score = inc[v]
                .iter()
                .filter(|&&r| partial_cf(&color, inst.edge(r)))
                .count();
            if cand == 0 || score > best.1 {
                best = (cand, score);
            }
        }
        color[v] = best.0;
        if best.0 == used {
            used += 1;
        }
    }

    for r in 0..inst.n() {
        let edge = inst.edge(r);
        if !partial_cf(&color, edge) {
            color[edge[0]] = used;
            used += 1;
        }
    }
    let c = KFoldColoring::from_colors(used.max(1), &color).expect("greedy colors are in range");
    c.compacted()
}

/// CF test on the already-colored vertices of an edge.
fn partial_cf(color: &[usize], edge: &[usize]) -> bool {
    const NONE: usize = usize::MAX;
    let colored: Vec<usize> = edge.iter().map(|&v| color[v]).filter(|&c| c != NONE).collect();
    if colored.len() <= 1 {
        return true;
    }
    colored
        .iter()
        .any(|c| colored.iter().filter(|d| *d == c).count() == 1)
}
