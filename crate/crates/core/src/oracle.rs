//! Brute-force ground truth for tiny instances.
//!
//! [`brute_force_length`] finds the shortest scalar linear code by trying
//! every assignment of columns from GF(q)^ℓ. It keeps its own span
//! arithmetic (vectors packed as base-q integers) and shares nothing with
//! the encoder constructions; only the final witness goes through
//! [`validate_encoder`] as a consistency check.

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;

use crate::collection::exact_alpha_cf;
use crate::coloring::exact_chi_cf;
use crate::encoder::{is_prime, validate_encoder, FieldMatrix};
use crate::error::{Error, Result};
use crate::instance::PicodInstance;
use crate::localcf::{exact_delta_k, exact_lambda_k};

/// Largest `q^ℓ` the oracle will enumerate.
pub const MAX_VECTORS: u64 = 1 << 12;

/// Shortest code found by exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub l_star: usize,
    pub witness: FieldMatrix,
}

/// Vectors of GF(q)^len packed as base-q integers.
struct Space {
    q: u64,
    len: u32,
    size: u64,
}

impl Space {
    fn digits(&self, mut x: u64) -> Vec<u64> {
        (0..self.len)
            .map(|_| {
                let d = x % self.q;
                x /= self.q;
                d
            })
            .collect()
    }

    fn pack(&self, digits: &[u64]) -> u64 {
        digits.iter().rev().fold(0, |acc, &d| acc * self.q + d)
    }

    fn add_scaled(&self, x: u64, a: u64, y: u64) -> u64 {
        let xs = self.digits(x);
        let ys = self.digits(y);
        let sum: Vec<u64> = xs.iter().zip(&ys).map(|(&u, &v)| (u + a * v) % self.q).collect();
        self.pack(&sum)
    }

    /// Membership table of the span of `gens`.
    fn span(&self, gens: &[u64]) -> Vec<bool> {
        let mut member = vec![false; self.size as usize];
        member[0] = true;
        let mut elems = vec![0u64];
        for &g in gens {
            if member[g as usize] {
                continue;
            }
            let mut grown = Vec::with_capacity(elems.len() * self.q as usize);
            for &s in &elems {
                for a in 0..self.q {
                    let v = self.add_scaled(s, a, g);
                    if !member[v as usize] {
                        member[v as usize] = true;
                        grown.push(v);
                    }
                }
            }
            elems.extend(grown);
        }
        member
    }

    /// Scalar decodability: a requested column outside the span of the others.
    fn receiver_ok(&self, cols: &[u64], edge: &[usize]) -> bool {
        edge.iter().any(|&d| {
            if cols[d] == 0 {
                return false;
            }
            let others: Vec<u64> = edge.iter().filter(|&&v| v != d).map(|&v| cols[v]).collect();
            !self.span(&others)[cols[d] as usize]
        })
    }
}

/// Smallest `ℓ <= l_max` with a scalar linear code over GF(q), plus a witness.
pub fn brute_force_length(inst: &PicodInstance, q: u64, k: usize, l_max: usize) -> Result<OracleResult> {
    if k != 1 {
        return Err(Error::InvalidParameter(format!(
            "the length oracle handles scalar codes only, got k = {k}"
        )));
    }
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    let m = inst.m();
    if inst.n() == 0 {
        return Ok(OracleResult {
            l_star: 0,
            witness: FieldMatrix::zeros(q, 1, 0, m)?,
        });
    }
    let order = inst.active_vertices();
    let mut position = vec![usize::MAX; m];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
    for (r, e) in inst.edges().iter().enumerate() {
        let last = e.iter().map(|&v| position[v]).max().expect("nonempty edge");
        closing[last].push(r);
    }

    for l in 1..=l_max {
        let size = q
            .checked_pow(l as u32)
            .filter(|&s| s <= MAX_VECTORS)
            .ok_or_else(|| Error::TooLarge(format!("GF({q})^{l} has more than {MAX_VECTORS} vectors")))?;
        let space = Space {
            q,
            len: l as u32,
            size,
        };
        let found = (0..size).into_par_iter().find_map_first(|first| {
            let mut cols = vec![0u64; m];
            cols[order[0]] = first;
            if !closing[0].iter().all(|&r| space.receiver_ok(&cols, inst.edge(r))) {
                return None;
            }
            let mut dfs = Dfs {
                space: &space,
                inst,
                order: &order,
                closing: &closing,
                cols: &mut cols,
            };
            match dfs.descend(1) {
                ControlFlow::Break(()) => Some(cols),
                ControlFlow::Continue(()) => None,
            }
        });
        if let Some(cols) = found {
            let mut g = FieldMatrix::zeros(q, 1, l, m)?;
            for (v, &c) in cols.iter().enumerate() {
                for (row, d) in space.digits(c).into_iter().enumerate() {
                    g.set(row, v, d);
                }
            }
            let report = validate_encoder(&g, inst)?;
            assert!(
                report.valid,
                "oracle witness failed validation: {:?}",
                report.failing()
            );
            return Ok(OracleResult {
                l_star: l,
                witness: g,
            });
        }
    }
    Err(Error::LimitExceeded {
        what: "optimal code length",
        limit: l_max,
    })
}

struct Dfs<'a> {
    space: &'a Space,
    inst: &'a PicodInstance,
    order: &'a [usize],
    closing: &'a [Vec<usize>],
    cols: &'a mut Vec<u64>,
}

impl Dfs<'_> {
    fn descend(&mut self, depth: usize) -> ControlFlow<()> {
        if depth == self.order.len() {
            return ControlFlow::Break(());
        }
        let v = self.order[depth];
        for c in 0..self.space.size {
            self.cols[v] = c;
            let ok = self.closing[depth]
                .iter()
                .all(|&r| self.space.receiver_ok(self.cols, self.inst.edge(r)));
            if ok {
                self.descend(depth + 1)?;
            }
        }
        self.cols[v] = 0;
        ControlFlow::Continue(())
    }
}

/// Search limits for [`certify_chain`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainBudgets {
    /// Palette limit for the chromatic number.
    pub chi: usize,
    /// Total color limit for the covering number.
    pub alpha: usize,
    /// Palette limit per coloring for the local parameters.
    pub local: usize,
    /// Longest code the length oracle tries.
    pub length: usize,
}

impl ChainBudgets {
    /// Budgets large enough to make every search exact on `inst`.
    pub fn exact_for(inst: &PicodInstance) -> Self {
        let active = inst.active_vertices().len().max(1);
        Self {
            chi: active,
            alpha: active,
            local: active,
            length: active.min(inst.n()).max(1),
        }
    }
}

/// Scalar parameters of one instance and whether
/// `ℓ* <= λ_1 = Δ_1 <= α_CF <= χ_CF` holds among them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub l_star: Option<usize>,
    pub chi: Option<usize>,
    pub alpha: Option<usize>,
    pub delta: Option<usize>,
    pub lambda: Option<usize>,
    /// `None` when some search ran out of budget.
    pub chain_ok: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

impl ChainReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

fn budgeted<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_budget() => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs every exact search with `k = 1` over GF(q) and checks the ordering.
pub fn certify_chain(inst: &PicodInstance, q: u64, budgets: ChainBudgets) -> Result<ChainReport> {
    let l_star = budgeted(brute_force_length(inst, q, 1, budgets.length))?.map(|o| o.l_star);
    let chi = budgeted(exact_chi_cf(inst, 1, budgets.chi))?.map(|(l, _)| l);
    let alpha = budgeted(exact_alpha_cf(inst, 1, budgets.alpha))?.map(|(a, _)| a);
    let delta = budgeted(exact_delta_k(inst, 1, budgets.local))?.map(|o| o.value);
    let lambda = budgeted(exact_lambda_k(inst, 1, budgets.local))?.map(|o| o.lambda);

    let mut report = ChainReport {
        l_star,
        chi,
        alpha,
        delta,
        lambda,
        chain_ok: None,
        violations: Vec::new(),
    };
    let (Some(l), Some(c), Some(a), Some(d), Some(lam)) = (l_star, chi, alpha, delta, lambda) else {
        return Ok(report);
    };
    let checks = [
        (l <= lam, format!("l* = {l} > lambda = {lam}")),
        (lam == d, format!("lambda = {lam} != delta = {d}")),
        (d <= a, format!("delta = {d} > alpha = {a}")),
        (a <= c, format!("alpha = {a} > chi = {c}")),
    ];
    report.violations = checks
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, msg)| msg)
        .collect();
    if !report.violations.is_empty() {
        report.violations.push(format!("instance: {}", inst.to_json()));
    }
    report.chain_ok = Some(report.violations.is_empty());
    Ok(report)
}
