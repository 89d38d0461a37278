//! PICOD instances as hypergraphs: messages are vertices `0..m`, each
//! receiver's request-set is a hyperedge. A receiver's side information is
//! the complement of its edge and is never stored.

use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `(n, m, I)` pliable index coding problem.
///
/// Edges are sorted and deduplicated within themselves. Duplicate edges are
/// kept: two receivers may share a request-set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PicodInstance {
    m: usize,
    edges: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawInstance {
    m: usize,
    edges: Vec<Vec<usize>>,
}

impl<'de> Deserialize<'de> for PicodInstance {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawInstance::deserialize(de)?;
        PicodInstance::new(raw.m, raw.edges).map_err(serde::de::Error::custom)
    }
}

impl PicodInstance {
    pub fn new(m: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "an instance needs at least one message".into(),
            ));
        }
        let mut out = Vec::with_capacity(edges.len());
        for (index, mut edge) in edges.into_iter().enumerate() {
            if edge.is_empty() {
                return Err(Error::EmptyEdge { index });
            }
            if let Some(&label) = edge.iter().find(|&&v| v >= m) {
                return Err(Error::LabelOutOfRange { index, label, m });
            }
            edge.sort_unstable();
            edge.dedup();
            out.push(edge);
        }
        Ok(Self { m, edges: out })
    }

    /// Number of messages.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of receivers.
    pub fn n(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge(&self, r: usize) -> &[usize] {
        &self.edges[r]
    }

    /// Side information of receiver `r`: every message outside its request-set.
    pub fn side_information(&self, r: usize) -> Vec<usize> {
        let edge = &self.edges[r];
        (0..self.m).filter(|v| edge.binary_search(v).is_err()).collect()
    }

    /// Per-vertex list of incident edge indices.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.m];
        for (r, edge) in self.edges.iter().enumerate() {
            for &v in edge {
                inc[v].push(r);
            }
        }
        inc
    }

    /// Vertices that lie in at least one edge, ascending.
    pub fn active_vertices(&self) -> Vec<usize> {
        let mut seen = vec![false; self.m];
        for edge in &self.edges {
            for &v in edge {
                seen[v] = true;
            }
        }
        (0..self.m).filter(|&v| seen[v]).collect()
    }

    /// Distinct request-sets in first-occurrence order, and for each receiver
    /// the index of its request-set in that list.
    pub fn distinct_edges(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let mut distinct: Vec<Vec<usize>> = Vec::new();
        let mut index = std::collections::HashMap::new();
        let mut of_receiver = Vec::with_capacity(self.edges.len());
        for edge in &self.edges {
            let id = *index.entry(edge.clone()).or_insert_with(|| {
                distinct.push(edge.clone());
                distinct.len() - 1
            });
            of_receiver.push(id);
        }
        (distinct, of_receiver)
    }

    /// Sub-instance keeping only the listed receivers, on the same vertex set.
    pub fn restrict(&self, receivers: &[usize]) -> PicodInstance {
        PicodInstance {
            m: self.m,
            edges: receivers.iter().map(|&r| self.edges[r].clone()).collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Parses the canonical `{"m": .., "edges": [[..], ..]}` format and validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text)?;
        Self::new(raw.m, raw.edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization cannot fail")
    }
}

/// Edge-intersection statistics of an instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionProfile {
    /// Largest number of other receivers whose request-set meets a given one.
    pub gamma: usize,
    pub per_edge_degree: Vec<usize>,
    pub min_edge_size: usize,
    pub max_edge_size: usize,
    /// `2 ln(gamma) - 1`, present only when `gamma > e`.
    pub kappa: Option<f64>,
    /// Bucket thresholds `kappa / 2^i`, empty when `kappa` is absent.
    pub thresholds: Vec<f64>,
}

/// Exact intersection degrees. Duplicate request-sets count once per receiver.
pub fn gamma(inst: &PicodInstance) -> IntersectionProfile {
    let n = inst.n();
    let inc = inst.incidence();
    let mut stamp = vec![usize::MAX; n];
    let mut per_edge_degree = Vec::with_capacity(n);
    for (r, edge) in inst.edges().iter().enumerate() {
        let mut deg = 0;
        stamp[r] = r;
        for &v in edge {
            for &s in &inc[v] {
                if stamp[s] != r {
                    stamp[s] = r;
                    deg += 1;
                }
            }
        }
        per_edge_degree.push(deg);
    }
    let gamma = per_edge_degree.iter().copied().max().unwrap_or(0);
    let min_edge_size = inst.edges().iter().map(Vec::len).min().unwrap_or(0);
    let max_edge_size = inst.edges().iter().map(Vec::len).max().unwrap_or(0);
    let kappa = kappa_of(gamma);
    let thresholds = kappa.map(bucket_thresholds).unwrap_or_default();
    IntersectionProfile {
        gamma,
        per_edge_degree,
        min_edge_size,
        max_edge_size,
        kappa,
        thresholds,
    }
}

pub(crate) fn kappa_of(gamma: usize) -> Option<f64> {
    let g = gamma as f64;
    (g > std::f64::consts::E).then(|| 2.0 * g.ln() - 1.0)
}

/// Thresholds `k_i = kappa / 2^i` for `0 <= i <= P`, `P = ceil(ln kappa)`.
///
/// The list is extended past `P` while `k_i / 2 > 1`, so every edge of size at
/// least one falls below `kappa` into some bucket; this only matters once
/// `ln(gamma)` is far beyond desk-scale values.
pub(crate) fn bucket_thresholds(kappa: f64) -> Vec<f64> {
    let p = kappa.ln().ceil().max(0.0) as usize;
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let k_i = kappa / 2f64.powi(i as i32);
        out.push(k_i);
        if i >= p && k_i / 2.0 <= 1.0 {
            break;
        }
        i += 1;
    }
    out
}

/// All 2-subsets of `0..m` as edges, in lexicographic order.
pub fn complete_two_uniform(m: usize) -> Result<PicodInstance> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "complete 2-uniform instance needs m >= 2, got {m}"
        )));
    }
    let mut edges = Vec::with_capacity(m * (m - 1) / 2);
    for a in 0..m {
        for b in a + 1..m {
            edges.push(vec![a, b]);
        }
    }
    PicodInstance::new(m, edges)
}

fn check_size_range(m: usize, min: usize, max: usize) -> Result<()> {
    if min == 0 || min > max || max > m {
        return Err(Error::InvalidParameter(format!(
            "edge size range ({min}, {max}) infeasible for m = {m}"
        )));
    }
    Ok(())
}

fn random_edge(rng: &mut ChaCha8Rng, m: usize, min: usize, max: usize) -> Vec<usize> {
    let size = rng.gen_range(min..=max);
    sample(rng, m, size).into_vec()
}

/// `n` independent uniform edges with sizes uniform in `[min, max]`.
pub fn random_instance(m: usize, n: usize, size_range: (usize, usize), seed: u64) -> Result<PicodInstance> {
    let (min, max) = size_range;
    check_size_range(m, min, max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..n).map(|_| random_edge(&mut rng, m, min, max)).collect();
    PicodInstance::new(m, edges)
}

/// Random instance whose intersection degree never exceeds `gamma_max`.
///
/// Candidate edges are drawn as in [`random_instance`] and kept only if every
/// edge degree stays within `gamma_max`. Drawing stops after `max_edges`
/// accepted edges or `4 * max_edges + 100` consecutive rejections.
pub fn random_gamma_bounded(
    m: usize,
    max_edges: usize,
    size_range: (usize, usize),
    gamma_max: usize,
    seed: u64,
) -> Result<PicodInstance> {
    let (min, max) = size_range;
    check_size_range(m, min, max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut degree: Vec<usize> = Vec::new();
    let mut inc: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut stamp: Vec<usize> = Vec::new();
    let mut rejections = 0;
    let reject_limit = 4 * max_edges + 100;
    let mut neighbours = Vec::new();
    while edges.len() < max_edges && rejections < reject_limit {
        let edge = random_edge(&mut rng, m, min, max);
        let tag = edges.len();
        neighbours.clear();
        for &v in &edge {
            for &s in &inc[v] {
                if stamp[s] != tag {
                    stamp[s] = tag;
                    neighbours.push(s);
                }
            }
        }
        let fits = neighbours.len() <= gamma_max && neighbours.iter().all(|&s| degree[s] < gamma_max);
        if !fits {
            // reset stamps so the next candidate (same tag) sees a clean slate
            for &s in &neighbours {
                stamp[s] = usize::MAX;
            }
            rejections += 1;
            continue;
        }
        rejections = 0;
        for &s in &neighbours {
            degree[s] += 1;
        }
        for &v in &edge {
            inc[v].push(tag);
        }
        degree.push(neighbours.len());
        stamp.push(usize::MAX);
        edges.push(edge);
    }
    PicodInstance::new(m, edges)
}

/// Named instances used throughout the docs and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedExample {
    /// Five vertices `a..e`, edges `{a,c},{b,e},{b,d},{c,e},{a,d}`.
    Pentagon,
    /// Eight vertices, eight 4-element request-sets, conflict-free 2-colorable.
    Ex2,
    /// Complete 2-uniform instance on ten vertices.
    Ex3,
}

impl std::str::FromStr for NamedExample {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pentagon" => Ok(Self::Pentagon),
            "ex2" => Ok(Self::Ex2),
            "ex3" => Ok(Self::Ex3),
            other => Err(Error::InvalidParameter(format!("unknown example {other:?}"))),
        }
    }
}

pub fn named_example(which: NamedExample) -> PicodInstance {
    match which {
        NamedExample::Pentagon => pentagon(),
        NamedExample::Ex2 => ex2(),
        NamedExample::Ex3 => complete_two_uniform(10).expect("m = 10 is valid"),
    }
}

pub fn pentagon() -> PicodInstance {
    PicodInstance::new(
        5,
        vec![vec![0, 2], vec![1, 4], vec![1, 3], vec![2, 4], vec![0, 3]],
    )
    .expect("static instance")
}

pub fn ex2() -> PicodInstance {
    let one_based = [
        [1, 2, 4, 6],
        [1, 2, 3, 5],
        [2, 3, 4, 7],
        [1, 3, 4, 8],
        [2, 5, 6, 7],
        [1, 5, 6, 8],
        [3, 5, 7, 8],
        [4, 6, 7, 8],
    ];
    let edges = one_based
        .iter()
        .map(|e| e.iter().map(|v| v - 1).collect())
        .collect();
    PicodInstance::new(8, edges).expect("static instance")
}
