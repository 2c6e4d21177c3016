//! Sparse quaternary check matrices, their binary views and the normalizer
//! basis construction.

use crate::algebra::binmat::BinMatrix;
use crate::algebra::gf4::{trace_inner, vector_trace_inner, Gf4, Gf4Vector};
use crate::error::{Error, Result};

/// A sparse m×n check matrix over GF(4). Rows are (column, coefficient)
/// pairs sorted by column; a per-VN adjacency list is kept in sync.
#[derive(Clone, PartialEq, Debug)]
pub struct CheckMatrix {
    n: usize,
    rows: Vec<Vec<(usize, Gf4)>>,
    vn_adj: Vec<Vec<usize>>,
}

impl CheckMatrix {
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, Gf4)>>) -> Result<CheckMatrix> {
        let mut sorted = rows;
        for row in &mut sorted {
            row.sort_by_key(|&(c, _)| c);
            for &(c, coeff) in row.iter() {
                if c >= n {
                    return Err(Error::InvalidArgument(format!(
                        "column {c} out of range for n = {n}"
                    )));
                }
                if coeff.is_zero() {
                    return Err(Error::InvalidArgument(
                        "stored coefficients must be nonzero".into(),
                    ));
                }
            }
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidArgument("duplicate column in row".into()));
            }
        }
        let mut vn_adj = vec![Vec::new(); n];
        for (j, row) in sorted.iter().enumerate() {
            for &(i, _) in row {
                vn_adj[i].push(j);
            }
        }
        Ok(CheckMatrix {
            n,
            rows: sorted,
            vn_adj,
        })
    }

    pub fn from_gf4_rows(rows: &[Gf4Vector]) -> Result<CheckMatrix> {
        let n = rows.first().map_or(0, |r| r.len());
        let sparse = rows
            .iter()
            .map(|r| {
                (0..r.len())
                    .filter(|&i| !r.get(i).is_zero())
                    .map(|i| (i, r.get(i)))
                    .collect()
            })
            .collect();
        CheckMatrix::from_rows(n, sparse)
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sparse row j: the CN adjacency N(j) with edge coefficients.
    pub fn row(&self, j: usize) -> &[(usize, Gf4)] {
        &self.rows[j]
    }

    /// Check indices incident to VN i (the adjacency M(i)).
    pub fn vn_checks(&self, i: usize) -> &[usize] {
        &self.vn_adj[i]
    }

    pub fn coeff(&self, j: usize, i: usize) -> Gf4 {
        self.rows[j]
            .binary_search_by_key(&i, |&(c, _)| c)
            .map_or(Gf4::ZERO, |k| self.rows[j][k].1)
    }

    pub fn row_vector(&self, j: usize) -> Gf4Vector {
        let mut v = Gf4Vector::zero(self.n);
        for &(i, c) in &self.rows[j] {
            v.set(i, c);
        }
        v
    }

    pub fn row_weight(&self, j: usize) -> usize {
        self.rows[j].len()
    }

    pub fn max_row_weight(&self) -> usize {
        (0..self.m()).map(|j| self.row_weight(j)).max().unwrap_or(0)
    }

    /// Binary (Hx | Hz) view, m × 2n.
    pub fn binary_view(&self) -> BinMatrix {
        let mut m = BinMatrix::zero(self.m(), 2 * self.n);
        for (j, row) in self.rows.iter().enumerate() {
            for &(i, c) in row {
                if c.x_bit() {
                    m.set(j, i, true);
                }
                if c.z_bit() {
                    m.set(j, self.n + i, true);
                }
            }
        }
        m
    }

    /// True iff every pair of rows commutes (trace inner product zero).
    pub fn rows_commute(&self) -> bool {
        let vecs: Vec<Gf4Vector> = (0..self.m()).map(|j| self.row_vector(j)).collect();
        for a in 0..vecs.len() {
            for b in (a + 1)..vecs.len() {
                if vector_trace_inner(&vecs[a], &vecs[b]).unwrap() != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Stack rows of another check matrix with the same n below this one.
    pub fn vstack(&self, other: &CheckMatrix) -> Result<CheckMatrix> {
        if self.n != other.n {
            return Err(Error::ShapeMismatch(format!(
                "vstack of n={} and n={}",
                self.n, other.n
            )));
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        CheckMatrix::from_rows(self.n, rows)
    }

    /// Plain-text form: header `m n`, then one row per line of `col:coeff`
    /// pairs with coeff in {1, w, W} and 0-based columns.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.m(), self.n);
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|&(c, g)| {
                    let sym = match g {
                        Gf4::ONE => "1",
                        Gf4::OMEGA => "w",
                        _ => "W",
                    };
                    format!("{c}:{sym}")
                })
                .collect();
            s.push_str(&fields.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<CheckMatrix> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty check matrix file".into()))?;
        let mut it = header.split_whitespace();
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad header: expected `m n`".into()))?;
        let n: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad header: expected `m n`".into()))?;
        let mut rows = Vec::with_capacity(m);
        for line in lines.take(m) {
            let mut row = Vec::new();
            for field in line.split_whitespace() {
                let (col, sym) = field
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("bad entry {field:?}")))?;
                let c: usize = col
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad column {col:?}")))?;
                let g = match sym {
                    "1" => Gf4::ONE,
                    "w" => Gf4::OMEGA,
                    "W" => Gf4::OMEGA_BAR,
                    _ => return Err(Error::Parse(format!("bad coefficient {sym:?}"))),
                };
                row.push((c, g));
            }
            rows.push(row);
        }
        if rows.len() != m {
            return Err(Error::Parse(format!(
                "expected {m} rows, found {}",
                rows.len()
            )));
        }
        CheckMatrix::from_rows(n, rows)
    }
}

/// The (2n−m)×n generator basis of the normalizer N(S).
#[derive(Clone, PartialEq, Debug)]
pub struct NormalizerMatrix {
    rows: Vec<Gf4Vector>,
    /// Sparse support per row: (column, coefficient) for nonzero entries.
    support: Vec<Vec<(usize, Gf4)>>,
}

impl NormalizerMatrix {
    fn new(rows: Vec<Gf4Vector>) -> NormalizerMatrix {
        let support = rows
            .iter()
            .map(|r| {
                (0..r.len())
                    .filter(|&i| !r.get(i).is_zero())
                    .map(|i| (i, r.get(i)))
                    .collect()
            })
            .collect();
        NormalizerMatrix { rows, support }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, j: usize) -> &Gf4Vector {
        &self.rows[j]
    }

    pub fn rows(&self) -> &[Gf4Vector] {
        &self.rows
    }

    pub fn support(&self, j: usize) -> &[(usize, Gf4)] {
        &self.support[j]
    }

    pub fn binary_view(&self) -> BinMatrix {
        let n = self.rows.first().map_or(0, |r| r.len());
        let mut m = BinMatrix::zero(self.rows.len(), 2 * n);
        for (j, row) in self.rows.iter().enumerate() {
            let (x, z) = row.binary_views();
            for i in 0..n {
                if x[i] == 1 {
                    m.set(j, i, true);
                }
                if z[i] == 1 {
                    m.set(j, n + i, true);
                }
            }
        }
        m
    }
}

/// Deterministic normalizer basis: the echelon-form nullspace of the
/// symplectic-swapped binary matrix (Hz | Hx), mapped back to GF(4).
/// Requires S to have full row rank and mutually commuting rows.
pub fn normalizer_basis(s: &CheckMatrix) -> Result<NormalizerMatrix> {
    let m = s.m();
    let n = s.n();
    let bin = s.binary_view();
    if bin.rank() != m {
        return Err(Error::RankDeficient {
            rank: bin.rank(),
            rows: m,
        });
    }
    if !s.rows_commute() {
        return Err(Error::InvalidArgument(
            "check matrix rows do not mutually commute".into(),
        ));
    }
    // Swap the halves: a vector (vx|vz) commutes with every row of S iff
    // (Hz | Hx)·(vx|vz)ᵀ = 0.
    let mut swapped = BinMatrix::zero(m, 2 * n);
    for r in 0..m {
        for c in 0..n {
            if bin.get(r, n + c) {
                swapped.set(r, c, true);
            }
            if bin.get(r, c) {
                swapped.set(r, n + c, true);
            }
        }
    }
    let ns = swapped.nullspace();
    debug_assert_eq!(ns.rows(), 2 * n - m);
    let rows = (0..ns.rows())
        .map(|r| {
            let v = ns.row_to_vec(r);
            Gf4Vector::from_binary_views(&v[..n], &v[n..]).unwrap()
        })
        .collect();
    Ok(NormalizerMatrix::new(rows))
}

/// Edge gate table: `gates[k]` for the k-th nonzero element (1, ω, ω̄) tells
/// whether CN messages on an edge with this coefficient enter the LLR
/// component of that element, i.e. trace_inner(ζ, coeff) = 1.
pub fn component_gates(coeff: Gf4) -> [bool; 3] {
    let mut g = [false; 3];
    for (k, zeta) in Gf4::NONZERO.iter().enumerate() {
        g[k] = trace_inner(*zeta, coeff) == 1;
    }
    g
}
