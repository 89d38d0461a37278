//! Linear encoders for pliable index coding and their validation.
//!
//! An encoder is an `ℓ × mk` matrix `G` over GF(q); the broadcast codeword is
//! `G x` where `x` lists the `k` field symbols of every message. Receiver `r`
//! holds every message outside its request-set `I_r`. It can recover some
//! requested message `d` exactly when the columns of `d` have full rank `k`
//! and their span meets the span of the other requested columns only in 0.

mod field;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

pub use field::{is_prime, smallest_prime_at_least, stack, FieldMatrix, MAX_MODULUS};

use crate::coloring::KFoldColoring;
use crate::error::{Error, Result};
use crate::instance::PicodInstance;
use crate::localcf::{delta_of, first_unsatisfied};

/// Indicator matrix over GF(2).
pub fn indicator_matrix(c: &KFoldColoring) -> FieldMatrix {
    indicator_matrix_over(c, 2).expect("GF(2) is a valid field")
}

/// `L × mk` matrix whose column `(i, j)` is the unit vector of the `j`-th color of vertex `i`.
pub fn indicator_matrix_over(c: &KFoldColoring, q: u64) -> Result<FieldMatrix> {
    let k = c.k();
    let mut g = FieldMatrix::zeros(q, k, c.palette(), c.num_vertices() * k)?;
    for v in 0..c.num_vertices() {
        for (j, &col) in c.colors(v).iter().enumerate() {
            g.set_entry(col, v, j, 1);
        }
    }
    Ok(g)
}

/// `Δ × D` generator of a `[D, Δ]` MDS code over GF(q).
///
/// `Δ = D` gives the identity and `Δ = 1` the all-ones row; otherwise row `t`
/// holds `a^t` at the points `a = 0, .., D-1` (with `0^0 = 1`), so any `Δ`
/// columns form an invertible Vandermonde matrix.
pub fn mds_generator(d: usize, delta: usize, q: u64) -> Result<FieldMatrix> {
    if delta == 0 || delta > d {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= delta <= D, got delta = {delta}, D = {d}"
        )));
    }
    if q < d as u64 {
        field::check_modulus(q)?;
        return Err(Error::FieldTooSmall { q, needed: d });
    }
    if delta == d {
        return FieldMatrix::identity(q, d);
    }
    let mut g = FieldMatrix::zeros(q, 1, delta, d)?;
    for a in 0..d {
        for t in 0..delta {
            g.set(t, a, field::pow_mod(a as u64, t as u64, q));
        }
    }
    Ok(g)
}

/// Default field for an MDS encoder on `d` essential colors.
pub fn default_mds_field(d: usize) -> u64 {
    smallest_prime_at_least(d.max(2) as u64)
}

/// Encoder with one `Δ`-row MDS column per color of `D`; colors outside `D` get zero columns.
pub fn mds_matrix_with_delta(c: &KFoldColoring, d: &[usize], delta: usize, q: u64) -> Result<FieldMatrix> {
    let d: Vec<usize> = d.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if let Some(&bad) = d.iter().find(|&&col| col >= c.palette()) {
        return Err(Error::InvalidParameter(format!(
            "color {bad} outside palette of size {}",
            c.palette()
        )));
    }
    let gen = mds_generator(d.len(), delta, q)?;
    let k = c.k();
    let mut g = FieldMatrix::zeros(q, k, delta, c.num_vertices() * k)?;
    for v in 0..c.num_vertices() {
        for (j, col) in c.colors(v).iter().enumerate() {
            if let Ok(idx) = d.binary_search(col) {
                for t in 0..delta {
                    g.set_entry(t, v, j, gen.get(t, idx));
                }
            }
        }
    }
    Ok(g)
}

/// MDS encoder of a coloring with an essential set; `q` defaults to the
/// smallest prime at least `|D|`.
pub fn mds_matrix(
    c: &KFoldColoring,
    d: &[usize],
    inst: &PicodInstance,
    q: Option<u64>,
) -> Result<FieldMatrix> {
    if let Some(edge) = first_unsatisfied(c, d, inst)? {
        return Err(Error::NotEssential { edge });
    }
    member_mds_matrix(c, d, inst, q)
}

/// MDS encoder for one member of a collection: `Δ` is taken over the edges
/// that `d` satisfies, which need not be all of them.
pub fn member_mds_matrix(
    c: &KFoldColoring,
    d: &[usize],
    inst: &PicodInstance,
    q: Option<u64>,
) -> Result<FieldMatrix> {
    let delta = delta_of(c, d, inst)?;
    let distinct = d.iter().collect::<BTreeSet<_>>().len();
    let q = q.unwrap_or_else(|| default_mds_field(distinct));
    mds_matrix_with_delta(c, d, delta, q)
}

/// Outcome of the decodability test for one receiver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReceiverVerdict {
    pub receiver: usize,
    pub satisfied: bool,
    /// The decoded message, the first qualifying one in ascending order.
    pub witness: Option<usize>,
    /// `k × ℓ` matrix with `W G_d = I` and `W G_i = 0` for the other requested `i`.
    #[serde(skip)]
    pub decoder: Option<FieldMatrix>,
}

fn check_width(g: &FieldMatrix, inst: &PicodInstance) -> Result<()> {
    if g.num_blocks() != inst.m() || g.cols() != inst.m() * g.k() {
        return Err(Error::ShapeMismatch(format!(
            "encoder has {} columns, instance needs {} x {}",
            g.cols(),
            inst.m(),
            g.k()
        )));
    }
    Ok(())
}

pub fn satisfies_receiver(g: &FieldMatrix, inst: &PicodInstance, r: usize) -> Result<ReceiverVerdict> {
    check_width(g, inst)?;
    if r >= inst.n() {
        return Err(Error::InvalidParameter(format!(
            "receiver {r} out of range (n = {})",
            inst.n()
        )));
    }
    let k = g.k();
    let edge = inst.edge(r);
    for &d in edge {
        let b = g.blocks(&[d]);
        if b.rank() < k {
            continue;
        }
        let others: Vec<usize> = edge.iter().copied().filter(|&v| v != d).collect();
        let o = g.blocks(&others);
        let joint = b.hcat(&o)?;
        if joint.rank() != k + o.rank() {
            continue;
        }
        let mut target = FieldMatrix::zeros(g.q(), 1, k, joint.cols())?;
        for j in 0..k {
            target.set(j, j, 1);
        }
        let w = joint
            .solve_left(&target)?
            .expect("full-rank block with trivial intersection has a left inverse");
        return Ok(ReceiverVerdict {
            receiver: r,
            satisfied: true,
            witness: Some(d),
            decoder: Some(w),
        });
    }
    Ok(ReceiverVerdict {
        receiver: r,
        satisfied: false,
        witness: None,
        decoder: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub verdicts: Vec<ReceiverVerdict>,
}

impl ValidationReport {
    pub fn failing(&self) -> Vec<usize> {
        self.verdicts
            .iter()
            .filter(|v| !v.satisfied)
            .map(|v| v.receiver)
            .collect()
    }

    pub fn satisfied_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.satisfied).count()
    }
}

/// Runs [`satisfies_receiver`] on every receiver.
pub fn validate_encoder(g: &FieldMatrix, inst: &PicodInstance) -> Result<ValidationReport> {
    check_width(g, inst)?;
    let verdicts = (0..inst.n())
        .into_par_iter()
        .map(|r| satisfies_receiver(g, inst, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(ValidationReport {
        valid: verdicts.iter().all(|v| v.satisfied),
        verdicts,
    })
}

/// Codeword `G x` for the message vector `x` of length `m k`.
pub fn encode(g: &FieldMatrix, x: &[u64]) -> Result<Vec<u64>> {
    if let Some(&bad) = x.iter().find(|&&s| s >= g.q()) {
        return Err(Error::InvalidParameter(format!(
            "symbol {bad} not below q = {}",
            g.q()
        )));
    }
    g.mul_vec(x)
}

/// Side information of receiver `r`: the `k` symbols of every message outside `I_r`.
pub fn side_information(
    inst: &PicodInstance,
    r: usize,
    k: usize,
    x: &[u64],
) -> Result<BTreeMap<usize, Vec<u64>>> {
    if x.len() != inst.m() * k {
        return Err(Error::ShapeMismatch(format!(
            "message vector of length {}, expected {}",
            x.len(),
            inst.m() * k
        )));
    }
    Ok(inst
        .side_information(r)
        .into_iter()
        .map(|i| (i, x[i * k..(i + 1) * k].to_vec()))
        .collect())
}

/// Strips the known messages from the codeword and applies the decoder,
/// returning the decoded message index and its `k` symbols.
pub fn decode(
    verdict: &ReceiverVerdict,
    g: &FieldMatrix,
    inst: &PicodInstance,
    codeword: &[u64],
    side_info: &BTreeMap<usize, Vec<u64>>,
) -> Result<(usize, Vec<u64>)> {
    let (Some(d), Some(w)) = (verdict.witness, verdict.decoder.as_ref()) else {
        return Err(Error::UnsatisfiedReceiver {
            receiver: verdict.receiver,
        });
    };
    if codeword.len() != g.rows() {
        return Err(Error::ShapeMismatch(format!(
            "codeword of length {}, encoder has {} rows",
            codeword.len(),
            g.rows()
        )));
    }
    let q = g.q();
    let k = g.k();
    let mut y: Vec<u64> = codeword.iter().map(|&s| s % q).collect();
    for i in inst.side_information(verdict.receiver) {
        let xi = side_info.get(&i).ok_or(Error::MissingSideInfo { message: i })?;
        if xi.len() != k {
            return Err(Error::ShapeMismatch(format!(
                "side information for message {i} has {} symbols, expected {k}",
                xi.len()
            )));
        }
        for (j, &s) in xi.iter().enumerate() {
            for (t, yt) in y.iter_mut().enumerate() {
                let sub = g.entry(t, i, j) * (s % q) % q;
                *yt = (*yt + q - sub) % q;
            }
        }
    }
    Ok((d, w.mul_vec(&y)?))
}
