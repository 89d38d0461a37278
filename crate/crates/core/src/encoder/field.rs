//! Dense matrices over a prime field GF(q).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported modulus; products of two residues must fit in `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime `p >= n` (and `p >= 2`).
pub fn smallest_prime_at_least(n: u64) -> u64 {
    let mut p = n.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

pub(crate) fn check_modulus(q: u64) -> Result<()> {
    if q >= MAX_MODULUS {
        return Err(Error::InvalidParameter(format!("modulus {q} exceeds 2^31")));
    }
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    Ok(())
}

pub(crate) fn inv_mod(a: u64, q: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(q));
    pow_mod(a, q - 2, q)
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc
}

/// Row-major matrix over GF(q). Columns come in blocks of `k`: column
/// `i * k + j` holds slot `j` of message `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    q: u64,
    k: usize,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct EncoderFile {
    q: u64,
    k: usize,
    rows: usize,
    entries: Vec<Vec<u64>>,
}

impl Serialize for FieldMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        EncoderFile {
            q: self.q,
            k: self.k,
            rows: self.rows,
            entries: self.to_rows(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FieldMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let file = EncoderFile::deserialize(de)?;
        if file.entries.len() != file.rows {
            return Err(serde::de::Error::custom(format!(
                "rows = {} but {} entry rows given",
                file.rows,
                file.entries.len()
            )));
        }
        FieldMatrix::from_rows(file.q, file.k, file.entries).map_err(serde::de::Error::custom)
    }
}

impl FieldMatrix {
    pub fn zeros(q: u64, k: usize, rows: usize, cols: usize) -> Result<Self> {
        check_modulus(q)?;
        if k == 0 || !cols.is_multiple_of(k) {
            return Err(Error::ShapeMismatch(format!(
                "{cols} columns do not split into blocks of {k}"
            )));
        }
        Ok(Self {
            q,
            k,
            rows,
            cols,
            data: vec![0; rows * cols],
        })
    }

    pub fn identity(q: u64, n: usize) -> Result<Self> {
        let mut m = Self::zeros(q, 1, n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        Ok(m)
    }

    /// Builds from row vectors. A matrix with no rows has no columns unless
    /// built with [`FieldMatrix::zeros`].
    pub fn from_rows(q: u64, k: usize, rows: Vec<Vec<u64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(q, k, rows.len(), cols)?;
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (c, x) in row.into_iter().enumerate() {
                if x >= q {
                    return Err(Error::InvalidParameter(format!(
                        "entry {x} at ({r}, {c}) not below q = {q}"
                    )));
                }
                m.data[r * cols + c] = x;
            }
        }
        Ok(m)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of column blocks (messages).
    pub fn num_blocks(&self) -> usize {
        self.cols / self.k
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: u64) {
        self.data[r * self.cols + c] = x % self.q;
    }

    /// Entry in row `r`, column of message `i` slot `j`.
    pub fn entry(&self, r: usize, i: usize, j: usize) -> u64 {
        self.get(r, i * self.k + j)
    }

    pub fn set_entry(&mut self, r: usize, i: usize, j: usize, x: u64) {
        let c = i * self.k + j;
        self.set(r, c, x);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Selected columns, in the given order, as a 1-block matrix.
    pub fn select_columns(&self, cols: &[usize]) -> FieldMatrix {
        let mut out = FieldMatrix {
            q: self.q,
            k: 1,
            rows: self.rows,
            cols: cols.len(),
            data: vec![0; self.rows * cols.len()],
        };
        for r in 0..self.rows {
            for (t, &c) in cols.iter().enumerate() {
                out.data[r * cols.len() + t] = self.get(r, c);
            }
        }
        out
    }

    /// Columns of the listed messages, keeping the block size.
    pub fn blocks(&self, messages: &[usize]) -> FieldMatrix {
        let cols: Vec<usize> = messages
            .iter()
            .flat_map(|&i| i * self.k..(i + 1) * self.k)
            .collect();
        let mut out = self.select_columns(&cols);
        out.k = self.k;
        out
    }

    /// `[self | other]`.
    pub fn hcat(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        if self.rows != other.rows || self.q != other.q {
            return Err(Error::ShapeMismatch(format!(
                "cannot place {}x{} over GF({}) beside {}x{} over GF({})",
                self.rows, self.cols, self.q, other.rows, other.cols, other.q
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(FieldMatrix {
            q: self.q,
            k: 1,
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut data = vec![0; self.rows * self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                data[c * self.rows + r] = self.get(r, c);
            }
        }
        FieldMatrix {
            q: self.q,
            k: 1,
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn mul(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        if self.cols != other.rows || self.q != other.q {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let q = self.q;
        let mut data = vec![0; self.rows * other.cols];
        for r in 0..self.rows {
            for t in 0..self.cols {
                let a = self.get(r, t);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let slot = &mut data[r * other.cols + c];
                    *slot = (*slot + a * other.get(t, c)) % q;
                }
            }
        }
        Ok(FieldMatrix {
            q,
            k: 1,
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    pub fn mul_vec(&self, x: &[u64]) -> Result<Vec<u64>> {
        if x.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(0, |acc, (&a, &b)| (acc + a * (b % self.q)) % self.q)
            })
            .collect())
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    fn rref(&mut self, limit_cols: usize) -> Vec<usize> {
        let q = self.q;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..limit_cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, row * self.cols + c);
                }
            }
            let inv = inv_mod(self.get(row, col), q);
            for c in 0..self.cols {
                let v = self.get(row, c) * inv % q;
                self.data[row * self.cols + c] = v;
            }
            for r in 0..self.rows {
                let f = self.get(r, col);
                if r == row || f == 0 {
                    continue;
                }
                for c in 0..self.cols {
                    let v = (self.get(r, c) + (q - f) * self.get(row, c)) % q;
                    self.data[r * self.cols + c] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let cols = m.cols;
        m.rref(cols).len()
    }

    /// Some `W` with `W * self = targets`, or `None` when no such `W` exists.
    pub fn solve_left(&self, targets: &FieldMatrix) -> Result<Option<FieldMatrix>> {
        if targets.cols != self.cols || targets.q != self.q {
            return Err(Error::ShapeMismatch(format!(
                "targets have {} columns, matrix has {}",
                targets.cols, self.cols
            )));
        }
        // self^T X = targets^T, with W = X^T
        let mut aug = self.transpose().hcat(&targets.transpose())?;
        let unknowns = self.rows;
        let pivots = aug.rref(unknowns);
        for r in pivots.len()..aug.rows {
            if (unknowns..aug.cols).any(|c| aug.get(r, c) != 0) {
                return Ok(None);
            }
        }
        let t = targets.rows;
        let mut w = FieldMatrix::zeros(self.q, 1, t, self.rows)?;
        for (r, &pc) in pivots.iter().enumerate() {
            for s in 0..t {
                w.set(s, pc, aug.get(r, unknowns + s));
            }
        }
        Ok(Some(w))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Vertical concatenation of encoders sharing field, block size and width.
pub fn stack(mats: &[FieldMatrix]) -> Result<FieldMatrix> {
    let Some(first) = mats.first() else {
        return Err(Error::ShapeMismatch("nothing to stack".into()));
    };
    let mut out = FieldMatrix::zeros(first.q, first.k, 0, first.cols)?;
    for (i, m) in mats.iter().enumerate() {
        if m.q != first.q || m.k != first.k || m.cols != first.cols {
            return Err(Error::ShapeMismatch(format!(
                "matrix {i} is {}x{} over GF({}) with k = {}, expected {} columns over GF({}) with k = {}",
                m.rows, m.cols, m.q, m.k, first.cols, first.q, first.k
            )));
        }
        out.data.extend_from_slice(&m.data);
        out.rows += m.rows;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn det(m: &[Vec<i64>], q: i64) -> i64 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        let mut total = 0;
        for c in 0..n {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != c)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let sign = if c % 2 == 0 { 1 } else { q - 1 };
            total = (total + sign * m[0][c] % q * det(&minor, q)) % q;
        }
        total
    }

    /// Rank as the largest nonvanishing minor.
    fn minor_rank(m: &FieldMatrix) -> usize {
        let q = m.q() as i64;
        let subsets = |n: usize, s: usize| -> Vec<Vec<usize>> {
            (0u32..1 << n)
                .filter(|b| b.count_ones() as usize == s)
                .map(|b| (0..n).filter(|i| b >> i & 1 == 1).collect())
                .collect()
        };
        for s in (1..=m.rows().min(m.cols())).rev() {
            for rs in subsets(m.rows(), s) {
                for cs in subsets(m.cols(), s) {
                    let sub: Vec<Vec<i64>> = rs
                        .iter()
                        .map(|&r| cs.iter().map(|&c| m.get(r, c) as i64).collect())
                        .collect();
                    if det(&sub, q) != 0 {
                        return s;
                    }
                }
            }
        }
        0
    }

    #[test]
    fn primes() {
        assert!(!is_prime(1));
        assert!(is_prime(2) && is_prime(11) && !is_prime(9));
        assert_eq!(smallest_prime_at_least(0), 2);
        assert_eq!(smallest_prime_at_least(10), 11);
        assert_eq!(smallest_prime_at_least(11), 11);
        assert!(matches!(FieldMatrix::zeros(4, 1, 1, 1), Err(Error::NotPrime(4))));
    }

    #[test]
    fn identity_and_zero_rank() {
        assert_eq!(FieldMatrix::identity(7, 5).unwrap().rank(), 5);
        assert_eq!(FieldMatrix::zeros(7, 1, 3, 4).unwrap().rank(), 0);
    }

    #[test]
    fn rank_matches_minor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..60 {
            let q = [2u64, 3, 7][trial % 3];
            let rows: Vec<Vec<u64>> = (0..5)
                .map(|_| {
                    (0..5)
                        .map(|_| if rng.gen_bool(0.4) { 0 } else { rng.gen_range(0..q) })
                        .collect()
                })
                .collect();
            let m = FieldMatrix::from_rows(q, 1, rows).unwrap();
            assert_eq!(m.rank(), minor_rank(&m), "trial {trial}");
        }
    }

    #[test]
    fn solve_left_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let a_rows: Vec<Vec<u64>> = (0..4)
                .map(|_| (0..6).map(|_| rng.gen_range(0..7)).collect())
                .collect();
            let a = FieldMatrix::from_rows(7, 1, a_rows).unwrap();
            let w_rows: Vec<Vec<u64>> = (0..2)
                .map(|_| (0..4).map(|_| rng.gen_range(0..7)).collect())
                .collect();
            let w = FieldMatrix::from_rows(7, 1, w_rows).unwrap();
            let t = w.mul(&a).unwrap();
            let found = a.solve_left(&t).unwrap().expect("consistent system");
            assert_eq!(found.mul(&a).unwrap(), t);
        }
        let a = FieldMatrix::from_rows(2, 1, vec![vec![1, 1]]).unwrap();
        let t = FieldMatrix::from_rows(2, 1, vec![vec![1, 0]]).unwrap();
        assert!(a.solve_left(&t).unwrap().is_none());
    }

    #[test]
    fn stack_checks_shapes() {
        let a = FieldMatrix::identity(2, 3).unwrap();
        let b = FieldMatrix::zeros(2, 1, 2, 3).unwrap();
        let s = stack(&[a.clone(), b]).unwrap();
        assert_eq!((s.rows(), s.cols()), (5, 3));
        assert!(stack(&[a.clone(), FieldMatrix::identity(3, 3).unwrap()]).is_err());
        assert!(stack(&[a, FieldMatrix::identity(2, 4).unwrap()]).is_err());
        assert!(stack(&[]).is_err());
    }

    #[test]
    fn json_shape() {
        let m = FieldMatrix::from_rows(2, 1, vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(m.to_json(), r#"{"q":2,"k":1,"rows":2,"entries":[[1,0],[0,1]]}"#);
        assert_eq!(FieldMatrix::from_json(&m.to_json()).unwrap(), m);
        assert!(FieldMatrix::from_json(r#"{"q":2,"k":1,"rows":1,"entries":[[2]]}"#).is_err());
        assert!(FieldMatrix::from_json(r#"{"q":2,"k":1,"rows":2,"entries":[[1]]}"#).is_err());
    }

    proptest::proptest! {
        #[test]
        fn rank_of_product_bounded(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gen = |rng: &mut ChaCha8Rng, r: usize, c: usize| {
                let rows = (0..r).map(|_| (0..c).map(|_| rng.gen_range(0..5)).collect()).collect();
                FieldMatrix::from_rows(5, 1, rows).unwrap()
            };
            let a = gen(&mut rng, 3, 4);
            let b = gen(&mut rng, 4, 5);
            let ab = a.mul(&b).unwrap();
            proptest::prop_assert!(ab.rank() <= a.rank().min(b.rank()));
            proptest::prop_assert_eq!(a.rank(), a.transpose().rank());
        }
    }
}
