//! Dense bit-packed matrices over GF(2) with elimination-based rank,
//! nullspace and row-space decomposition.
//!
//! Pivots are always taken at the lowest available column index so that
//! every derived basis (nullspace, normalizer) is deterministic.

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BinMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BinMatrix {
    pub fn zero(rows: usize, cols: usize) -> BinMatrix {
        let words = cols.div_ceil(64).max(1);
        BinMatrix {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> BinMatrix {
        let mut m = BinMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> BinMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = BinMatrix::zero(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = r * self.words + c / 64;
        if v {
            self.data[w] |= 1u64 << (c % 64);
        } else {
            self.data[w] &= !(1u64 << (c % 64));
        }
    }

    pub fn row_to_vec(&self, r: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(r, c) as u8).collect()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.data[r * self.words..(r + 1) * self.words]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    /// XOR row `src` into row `dst`.
    pub fn xor_row(&mut self, dst: usize, src: usize) {
        let (d, s) = (dst * self.words, src * self.words);
        for k in 0..self.words {
            let v = self.data[s + k];
            self.data[d + k] ^= v;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.words {
            self.data.swap(a * self.words + k, b * self.words + k);
        }
    }

    pub fn append_row(&mut self, row: &[u8]) {
        assert_eq!(row.len(), self.cols);
        self.data.extend(std::iter::repeat_n(0u64, self.words));
        self.rows += 1;
        for (j, &b) in row.iter().enumerate() {
            if b & 1 == 1 {
                self.set(self.rows - 1, j, true);
            }
        }
    }

    pub fn vstack(&self, other: &BinMatrix) -> Result<BinMatrix> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "vstack of {}-col and {}-col matrices",
                self.cols, other.cols
            )));
        }
        let mut m = self.clone();
        m.rows += other.rows;
        m.data.extend_from_slice(&other.data);
        Ok(m)
    }

    pub fn hstack(&self, other: &BinMatrix) -> Result<BinMatrix> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "hstack of {}-row and {}-row matrices",
                self.rows, other.rows
            )));
        }
        let mut m = BinMatrix::zero(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    m.set(r, c, true);
                }
            }
            for c in 0..other.cols {
                if other.get(r, c) {
                    m.set(r, self.cols + c, true);
                }
            }
        }
        Ok(m)
    }

    pub fn transpose(&self) -> BinMatrix {
        let mut m = BinMatrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    m.set(c, r, true);
                }
            }
        }
        m
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BinMatrix) -> Result<BinMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut m = BinMatrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    m.xor_row_from(r, other, c);
                }
            }
        }
        Ok(m)
    }

    fn xor_row_from(&mut self, dst: usize, other: &BinMatrix, src: usize) {
        let d = dst * self.words;
        let s = src * other.words;
        for k in 0..self.words.min(other.words) {
            self.data[d + k] ^= other.data[s + k];
        }
    }

    /// Matrix-vector product M·vᵀ over GF(2).
    pub fn mul_vec(&self, v: &[u8]) -> Result<Vec<u8>> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                let mut acc = 0u8;
                for (c, &b) in v.iter().enumerate() {
                    if b & 1 == 1 && self.get(r, c) {
                        acc ^= 1;
                    }
                }
                acc
            })
            .collect())
    }

    /// In-place reduced row echelon form; returns pivot column per pivot row.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut pr = 0;
        for c in 0..self.cols {
            if pr == self.rows {
                break;
            }
            let Some(sel) = (pr..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(pr, sel);
            for r in 0..self.rows {
                if r != pr && self.get(r, c) {
                    self.xor_row(r, pr);
                }
            }
            pivots.push(c);
            pr += 1;
        }
        pivots
    }

    /// Rank over GF(2) via elimination.
    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Deterministic nullspace basis: rows v with M·vᵀ = 0, one per free
    /// column in ascending column order. Row count = cols − rank.
    pub fn nullspace(&self) -> BinMatrix {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: Vec<Option<usize>> = {
            let mut s = vec![None; self.cols];
            for (r, &c) in pivots.iter().enumerate() {
                s[c] = Some(r);
            }
            s
        };
        let free: Vec<usize> = (0..self.cols).filter(|&c| pivot_set[c].is_none()).collect();
        let mut basis = BinMatrix::zero(free.len(), self.cols);
        for (k, &fc) in free.iter().enumerate() {
            basis.set(k, fc, true);
            for (r, &pc) in pivots.iter().enumerate() {
                if m.get(r, fc) {
                    basis.set(k, pc, true);
                }
            }
        }
        basis
    }

    /// Express each row of `targets` as a GF(2) combination of the rows of
    /// `self` (which must have independent rows). Returns M with
    /// M·self = targets, or an error if some target is outside the row space.
    pub fn decompose_rows(&self, targets: &BinMatrix) -> Result<BinMatrix> {
        if targets.cols != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "decompose targets have {} cols, matrix has {}",
                targets.cols, self.cols
            )));
        }
        // Eliminate [self | I]; then reduce each target against the pivots,
        // collecting the combination from the identity side.
        let mut aug = self.hstack(&BinMatrix::identity(self.rows))?;
        let pivots = aug.rref();
        if pivots.iter().any(|&c| c >= self.cols) {
            return Err(Error::RankDeficient {
                rank: pivots.iter().filter(|&&c| c < self.cols).count(),
                rows: self.rows,
            });
        }
        let mut m = BinMatrix::zero(targets.rows, self.rows);
        for t in 0..targets.rows {
            let mut residual = targets.row_to_vec(t);
            let mut combo = vec![0u8; self.rows];
            for (r, &pc) in pivots.iter().enumerate() {
                if residual[pc] == 1 {
                    for c in 0..self.cols {
                        residual[c] ^= aug.get(r, c) as u8;
                    }
                    for k in 0..self.rows {
                        combo[k] ^= aug.get(r, self.cols + k) as u8;
                    }
                }
            }
            if residual.iter().any(|&b| b == 1) {
                return Err(Error::Construction(format!(
                    "row {t} is not in the row space of the base matrix"
                )));
            }
            for (k, &b) in combo.iter().enumerate() {
                if b == 1 {
                    m.set(t, k, true);
                }
            }
        }
        Ok(m)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// Plain text serialization: one 0/1 row per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                s.push(if self.get(r, c) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<BinMatrix> {
        let rows: Vec<Vec<u8>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| match c {
                        '0' => Ok(0u8),
                        '1' => Ok(1u8),
                        _ => Err(Error::Parse(format!("unexpected character {c:?}"))),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        if let Some(w) = rows.first().map(|r| r.len()) {
            if rows.iter().any(|r| r.len() != w) {
                return Err(Error::Parse("ragged 0/1 matrix".into()));
            }
        }
        Ok(BinMatrix::from_rows(&rows))
    }
}

/// Rank over GF(2).
pub fn gf2_rank(m: &BinMatrix) -> usize {
    m.rank()
}

/// Nullspace basis over GF(2); rows v satisfy M·vᵀ = 0.
pub fn gf2_nullspace(m: &BinMatrix) -> BinMatrix {
    m.nullspace()
}

/// Symplectic criterion: Hx·Hzᵀ + Hz·Hxᵀ = 0 over GF(2).
pub fn symplectic_valid(hx: &BinMatrix, hz: &BinMatrix) -> Result<bool> {
    if hx.rows() != hz.rows() || hx.cols() != hz.cols() {
        return Err(Error::ShapeMismatch(format!(
            "Hx is {}x{}, Hz is {}x{}",
            hx.rows(),
            hx.cols(),
            hz.rows(),
            hz.cols()
        )));
    }
    let mut p = hx.mul(&hz.transpose())?;
    let q = hz.mul(&hx.transpose())?;
    for r in 0..p.rows() {
        for c in 0..p.cols() {
            if q.get(r, c) {
                p.set(r, c, !p.get(r, c));
            }
        }
    }
    Ok(p.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rank_basics() {
        assert_eq!(BinMatrix::identity(3).rank(), 3);
        assert_eq!(BinMatrix::zero(4, 6).rank(), 0);
        let m = BinMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn nullspace_identity_is_empty() {
        assert_eq!(BinMatrix::identity(5).nullspace().rows(), 0);
    }

    #[test]
    fn nullspace_single_parity_row() {
        let m = BinMatrix::from_rows(&[vec![1, 1]]);
        let ns = m.nullspace();
        assert_eq!(ns.rows(), 1);
        assert_eq!(ns.row_to_vec(0), vec![1, 1]);
    }

    #[test]
    fn nullspace_random_verification() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rows: Vec<Vec<u8>> = (0..10)
                .map(|_| (0..20).map(|_| rng.random_range(0..2u8)).collect())
                .collect();
            let m = BinMatrix::from_rows(&rows);
            let ns = m.nullspace();
            assert_eq!(ns.rows(), 20 - m.rank());
            for r in 0..ns.rows() {
                let v = ns.row_to_vec(r);
                assert!(m.mul_vec(&v).unwrap().iter().all(|&b| b == 0));
            }
            // basis rows independent
            assert_eq!(ns.rank(), ns.rows());
        }
    }

    #[test]
    fn decompose_rows_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let base = loop {
            let rows: Vec<Vec<u8>> = (0..5)
                .map(|_| (0..12).map(|_| rng.random_range(0..2u8)).collect())
                .collect();
            let m = BinMatrix::from_rows(&rows);
            if m.rank() == 5 {
                break m;
            }
        };
        // random combinations
        let combo = BinMatrix::from_rows(
            &(0..8)
                .map(|_| (0..5).map(|_| rng.random_range(0..2u8)).collect())
                .collect::<Vec<_>>(),
        );
        let targets = combo.mul(&base).unwrap();
        let m = base.decompose_rows(&targets).unwrap();
        assert_eq!(m, combo);
        assert_eq!(m.mul(&base).unwrap(), targets);
    }

    #[test]
    fn symplectic_criterion_cases() {
        let h = BinMatrix::from_rows(&[vec![1, 0]]);
        assert!(symplectic_valid(&h, &h).unwrap());
        let hx = BinMatrix::from_rows(&[vec![1, 0]]);
        let hz = BinMatrix::from_rows(&[vec![0, 1]]);
        // Hx·Hzᵀ + Hz·Hxᵀ = 0 here because the cross terms coincide.
        assert!(symplectic_valid(&hx, &hz).unwrap());
        // X1 against Z1 anticommute: Eq. (2) evaluates to a nonzero matrix.
        let hx = BinMatrix::from_rows(&[vec![1, 0], vec![0, 0]]);
        let hz = BinMatrix::from_rows(&[vec![0, 0], vec![1, 0]]);
        assert!(!symplectic_valid(&hx, &hz).unwrap());
        assert!(symplectic_valid(&hx, &BinMatrix::from_rows(&[vec![1]])).is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = BinMatrix::from_rows(&[vec![1, 0, 1], vec![0, 1, 1]]);
        assert_eq!(BinMatrix::from_text(&m.to_text()).unwrap(), m);
    }
}
