//! Construction of redundant checks, the syndrome remapping z_oc = M·z and a
//! randomized low-weight stabilizer search.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{BinMatrix, CheckMatrix, Gf4};
use crate::codes::StabilizerCode;
use crate::error::{Error, Result};

/// An overcomplete check set: the stacked quaternary matrix H_oc, the binary
/// map M with H_oc = M·H, and per-row bookkeeping. Rows whose M row is not a
/// unit vector are marked redundant (they receive the w_r initial CN weight).
#[derive(Clone, Debug)]
pub struct OvercompleteCheckSet {
    pub hoc: CheckMatrix,
    pub m_map: BinMatrix,
    pub redundant: Vec<bool>,
    pub row_weights: Vec<usize>,
}

impl OvercompleteCheckSet {
    /// Assemble from per-block rows: X rows become ω rows, Z rows ω̄ rows;
    /// M is block diagonal over the rows of the code's full-rank S.
    pub fn from_blocks(
        code: &StabilizerCode,
        x_rows: &BinMatrix,
        mx: &BinMatrix,
        z_rows: &BinMatrix,
        mz: &BinMatrix,
    ) -> Result<OvercompleteCheckSet> {
        let n = code.n;
        if x_rows.cols() != n || z_rows.cols() != n {
            return Err(Error::ShapeMismatch("block rows must have n columns".into()));
        }
        if mx.rows() != x_rows.rows() || mz.rows() != z_rows.rows() {
            return Err(Error::ShapeMismatch("M blocks must match the row counts".into()));
        }
        if mx.cols() != code.hx.rows() || mz.cols() != code.hz.rows() {
            return Err(Error::ShapeMismatch(
                "M blocks must have one column per original check".into(),
            ));
        }
        let mut rows = Vec::with_capacity(x_rows.rows() + z_rows.rows());
        for (block, coeff) in [(x_rows, Gf4::OMEGA), (z_rows, Gf4::OMEGA_BAR)] {
            for r in 0..block.rows() {
                rows.push(
                    (0..n)
                        .filter(|&c| block.get(r, c))
                        .map(|c| (c, coeff))
                        .collect(),
                );
            }
        }
        let hoc = CheckMatrix::from_rows(n, rows)?;
        let m = code.m();
        let mut m_map = BinMatrix::zero(hoc.m(), m);
        let mx_cols = code.hx.rows();
        for r in 0..mx.rows() {
            for c in 0..mx.cols() {
                if mx.get(r, c) {
                    m_map.set(r, c, true);
                }
            }
        }
        for r in 0..mz.rows() {
            for c in 0..mz.cols() {
                if mz.get(r, c) {
                    m_map.set(mx.rows() + r, mx_cols + c, true);
                }
            }
        }
        // H_oc = M·H blockwise, checked on the stacked binary views.
        let expected = m_map.mul(&code.s.binary_view())?;
        if expected != hoc.binary_view() {
            return Err(Error::Construction(
                "overcomplete rows are inconsistent with M·H".into(),
            ));
        }
        let redundant = (0..m_map.rows()).map(|r| m_map.row_weight(r) != 1).collect();
        let row_weights = (0..hoc.m()).map(|j| hoc.row_weight(j)).collect();
        Ok(OvercompleteCheckSet {
            hoc,
            m_map,
            redundant,
            row_weights,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.hoc.m()
    }

    /// Whether the overcomplete set still carries the full syndrome
    /// information: rank of the binary view equals the original m.
    pub fn is_full_rank(&self) -> bool {
        self.hoc.binary_view().rank() == self.m_map.cols()
    }

    /// Serialize as the check matrix text followed by an `M` block.
    pub fn to_text(&self) -> String {
        let mut s = self.hoc.to_text();
        s.push_str("M\n");
        s.push_str(&self.m_map.to_text());
        s
    }

    pub fn from_text(text: &str) -> Result<OvercompleteCheckSet> {
        let Some((mat, mmap)) = text.split_once("\nM\n") else {
            return Err(Error::Parse("missing `M` block".into()));
        };
        let hoc = CheckMatrix::from_text(mat)?;
        let m_map = BinMatrix::from_text(mmap)?;
        if m_map.rows() != hoc.m() {
            return Err(Error::Parse("M row count does not match H_oc".into()));
        }
        let redundant = (0..m_map.rows()).map(|r| m_map.row_weight(r) != 1).collect();
        let row_weights = (0..hoc.m()).map(|j| hoc.row_weight(j)).collect();
        Ok(OvercompleteCheckSet {
            hoc,
            m_map,
            redundant,
            row_weights,
        })
    }
}

/// Remap an original syndrome through M: z_oc = M·z over GF(2).
pub fn remap_syndrome(m_map: &BinMatrix, z: &[u8]) -> Result<Vec<u8>> {
    m_map.mul_vec(z)
}

/// The 3n×n toric overcomplete matrix: per block the d² original weight-4
/// rows followed by the weight-6 XOR of every adjacent stabilizer pair
/// (d² horizontal pairs, then d² vertical pairs).
pub fn toric_weight6(
    code: &StabilizerCode,
    layout: &crate::codes::ToricLayout,
) -> Result<OvercompleteCheckSet> {
    let d = layout.d;
    if code.n != 2 * d * d || code.m() != 2 * (d * d - 1) {
        return Err(Error::InvalidArgument(
            "toric_weight6 requires the code built by build_toric for this layout".into(),
        ));
    }
    let build_block = |full: &BinMatrix, pairs: &[(usize, usize)]| -> BinMatrix {
        let mut rows: Vec<Vec<u8>> = (0..full.rows()).map(|r| full.row_to_vec(r)).collect();
        for &(a, b) in pairs {
            let ra = full.row_to_vec(a);
            let rb = full.row_to_vec(b);
            rows.push(ra.iter().zip(&rb).map(|(&x, &y)| x ^ y).collect());
        }
        BinMatrix::from_rows(&rows)
    };
    let x_rows = build_block(&layout.vertex_matrix(), &layout.vertex_pairs);
    let z_rows = build_block(&layout.plaquette_matrix(), &layout.plaquette_pairs);
    let mx = code.hx.decompose_rows(&x_rows)?;
    let mz = code.hz.decompose_rows(&z_rows)?;
    OvercompleteCheckSet::from_blocks(code, &x_rows, &mx, &z_rows, &mz)
}

/// All 2^m − 1 nonzero row combinations per block, in binary-counting order:
/// combination index i (from 1) selects original row b for every set bit b.
pub fn combinations_all(code: &StabilizerCode) -> Result<OvercompleteCheckSet> {
    let build = |h: &BinMatrix| -> Result<(BinMatrix, BinMatrix)> {
        let m = h.rows();
        if m > 20 {
            return Err(Error::TooManyRows { rows: m });
        }
        let total = (1usize << m) - 1;
        let mut rows = BinMatrix::zero(total, h.cols());
        let mut map = BinMatrix::zero(total, m);
        for idx in 1..=total {
            for b in 0..m {
                if idx >> b & 1 == 1 {
                    map.set(idx - 1, b, true);
                    for c in 0..h.cols() {
                        if h.get(b, c) {
                            rows.set(idx - 1, c, !rows.get(idx - 1, c));
                        }
                    }
                }
            }
        }
        Ok((rows, map))
    };
    let (x_rows, mx) = build(&code.hx)?;
    let (z_rows, mz) = build(&code.hz)?;
    OvercompleteCheckSet::from_blocks(code, &x_rows, &mx, &z_rows, &mz)
}

/// The natural overcomplete set of a GB code: all circulant rows per block.
pub fn gb_natural(code: &StabilizerCode) -> Result<OvercompleteCheckSet> {
    let Some((full_hx, full_hz)) = code.natural_blocks.as_ref() else {
        return Err(Error::InvalidArgument(
            "code has no natural overcomplete blocks (not a GB code)".into(),
        ));
    };
    let mx = code.hx.decompose_rows(full_hx)?;
    let mz = code.hz.decompose_rows(full_hz)?;
    OvercompleteCheckSet::from_blocks(code, full_hx, &mx, full_hz, &mz)
}

/// Randomized low-weight stabilizer search over the row spaces of the CSS
/// blocks: repeated information-set passes (random column permutation plus
/// row reduction) collecting rows of weight ≤ max_weight and random small
/// combinations of reduced rows. Deterministic for a fixed seed.
pub fn randomized_low_weight_search(
    code: &StabilizerCode,
    max_weight: usize,
    trials: usize,
    seed: u64,
) -> Result<OvercompleteCheckSet> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let search_block = |h: &BinMatrix, stream: u64| -> (BinMatrix, Vec<Vec<u8>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let cols = h.cols();
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        let mut found: Vec<Vec<u8>> = Vec::new();
        let mut keep = |row: Vec<u8>, found: &mut Vec<Vec<u8>>| {
            let w: usize = row.iter().map(|&b| b as usize).sum();
            if w > 0 && w <= max_weight && seen.insert(row.clone()) {
                found.push(row);
            }
        };
        for _ in 0..trials {
            let mut perm: Vec<usize> = (0..cols).collect();
            perm.shuffle(&mut rng);
            let mut permuted = BinMatrix::zero(h.rows(), cols);
            for r in 0..h.rows() {
                for (pc, &c) in perm.iter().enumerate() {
                    if h.get(r, c) {
                        permuted.set(r, pc, true);
                    }
                }
            }
            permuted.rref();
            let unpermute = |r: usize| -> Vec<u8> {
                let mut row = vec![0u8; cols];
                for (pc, &c) in perm.iter().enumerate() {
                    row[c] = permuted.get(r, pc) as u8;
                }
                row
            };
            let reduced: Vec<Vec<u8>> = (0..h.rows())
                .map(unpermute)
                .filter(|r| r.iter().any(|&b| b == 1))
                .collect();
            for row in &reduced {
                keep(row.clone(), &mut found);
            }
            // A few random pair sums widen the reach beyond single rows.
            if reduced.len() >= 2 {
                for _ in 0..reduced.len() {
                    let a = rng.random_range(0..reduced.len());
                    let b = rng.random_range(0..reduced.len());
                    if a == b {
                        continue;
                    }
                    let sum: Vec<u8> = reduced[a]
                        .iter()
                        .zip(&reduced[b])
                        .map(|(&x, &y)| x ^ y)
                        .collect();
                    keep(sum, &mut found);
                }
            }
        }
        (BinMatrix::from_rows(&found), found)
    };
    let (x_rows, fx) = search_block(&code.hx, 0);
    let (z_rows, fz) = search_block(&code.hz, 1);
    let empty_x = fx.is_empty();
    let empty_z = fz.is_empty();
    let x_rows = if empty_x {
        BinMatrix::zero(0, code.n)
    } else {
        x_rows
    };
    let z_rows = if empty_z {
        BinMatrix::zero(0, code.n)
    } else {
        z_rows
    };
    let mx = code.hx.decompose_rows(&x_rows)?;
    let mz = code.hz.decompose_rows(&z_rows)?;
    OvercompleteCheckSet::from_blocks(code, &x_rows, &mx, &z_rows, &mz)
}
