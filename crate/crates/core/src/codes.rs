//! Constructors for the code families used by the decoders: CSS codes from
//! explicit blocks, toric codes, generalized bicycle (GB) codes and the
//! [[7,1,3]] quantum BCH code.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    gf2_rank, normalizer_basis, BinMatrix, CheckMatrix, Gf4, NormalizerMatrix,
};
use crate::error::{Error, Result};

/// A CSS pair of binary blocks with Hx·Hzᵀ = 0.
#[derive(Clone, Debug)]
pub struct CssCode {
    pub hx: BinMatrix,
    pub hz: BinMatrix,
    pub n: usize,
    pub k: usize,
}

/// A stabilizer code with full-rank quaternary check matrix S, its
/// normalizer basis S⊥ and the underlying CSS blocks.
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    pub s: CheckMatrix,
    pub sperp: NormalizerMatrix,
    /// Full-rank X block (rows become the ω rows of S).
    pub hx: BinMatrix,
    /// Full-rank Z block (rows become the ω̄ rows of S).
    pub hz: BinMatrix,
    pub n: usize,
    pub k: usize,
    pub check_weight_max: usize,
    /// Caller-supplied metadata; never computed.
    pub declared_distance: Option<usize>,
    /// For GB codes: the complete circulant blocks, a natural overcomplete
    /// set of checks.
    pub natural_blocks: Option<(BinMatrix, BinMatrix)>,
}

impl StabilizerCode {
    /// Number of rows of S.
    pub fn m(&self) -> usize {
        self.s.m()
    }
}

/// Edge/vertex/plaquette bookkeeping for a d×d toric lattice. Qubits are
/// indexed 0..2d²−1: horizontal edges row-major first, then vertical edges
/// row-major.
#[derive(Clone, Debug)]
pub struct ToricLayout {
    pub d: usize,
    /// The four qubits incident to each vertex (r, c), index r·d + c.
    pub vertex_edges: Vec<[usize; 4]>,
    /// The four boundary qubits of each plaquette (r, c).
    pub plaquette_edges: Vec<[usize; 4]>,
    /// Adjacent vertex pairs: d² horizontal pairs then d² vertical pairs.
    pub vertex_pairs: Vec<(usize, usize)>,
    /// Adjacent plaquette pairs, same layout.
    pub plaquette_pairs: Vec<(usize, usize)>,
}

impl ToricLayout {
    pub fn horizontal_edge(d: usize, r: usize, c: usize) -> usize {
        (r % d) * d + c % d
    }

    pub fn vertical_edge(d: usize, r: usize, c: usize) -> usize {
        d * d + (r % d) * d + c % d
    }

    fn new(d: usize) -> ToricLayout {
        let h = |r, c| ToricLayout::horizontal_edge(d, r, c);
        let v = |r, c| ToricLayout::vertical_edge(d, r, c);
        let mut vertex_edges = Vec::with_capacity(d * d);
        let mut plaquette_edges = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                vertex_edges.push([h(r, (c + d - 1) % d), h(r, c), v((r + d - 1) % d, c), v(r, c)]);
                plaquette_edges.push([h(r, c), h((r + 1) % d, c), v(r, c), v(r, (c + 1) % d)]);
            }
        }
        let idx = |r: usize, c: usize| (r % d) * d + c % d;
        let mut vertex_pairs = Vec::with_capacity(2 * d * d);
        let mut plaquette_pairs = Vec::with_capacity(2 * d * d);
        for r in 0..d {
            for c in 0..d {
                vertex_pairs.push((idx(r, c), idx(r, c + 1)));
                plaquette_pairs.push((idx(r, c), idx(r, c + 1)));
            }
        }
        for r in 0..d {
            for c in 0..d {
                vertex_pairs.push((idx(r, c), idx(r + 1, c)));
                plaquette_pairs.push((idx(r, c), idx(r + 1, c)));
            }
        }
        ToricLayout {
            d,
            vertex_edges,
            plaquette_edges,
            vertex_pairs,
            plaquette_pairs,
        }
    }

    /// The full d²×2d² vertex (X) stabilizer matrix, before redundancy removal.
    pub fn vertex_matrix(&self) -> BinMatrix {
        let n = 2 * self.d * self.d;
        let mut m = BinMatrix::zero(self.d * self.d, n);
        for (r, edges) in self.vertex_edges.iter().enumerate() {
            for &e in edges {
                m.set(r, e, true);
            }
        }
        m
    }

    /// The full d²×2d² plaquette (Z) stabilizer matrix.
    pub fn plaquette_matrix(&self) -> BinMatrix {
        let n = 2 * self.d * self.d;
        let mut m = BinMatrix::zero(self.d * self.d, n);
        for (r, edges) in self.plaquette_edges.iter().enumerate() {
            for &e in edges {
                m.set(r, e, true);
            }
        }
        m
    }
}

/// A generalized bicycle code specification: circulant size and the support
/// exponents of the polynomials defining A and B.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GbSpec {
    pub circ_size: usize,
    pub a_exponents: Vec<usize>,
    pub b_exponents: Vec<usize>,
    /// Rows selected per block for the full-rank check matrix; defaults to
    /// the block rank.
    #[serde(default)]
    pub rows_per_block: Option<usize>,
}

fn circulant(size: usize, exponents: &[usize]) -> BinMatrix {
    let mut m = BinMatrix::zero(size, size);
    for r in 0..size {
        for &e in exponents {
            let c = (r + e) % size;
            m.set(r, c, !m.get(r, c));
        }
    }
    m
}

/// Assemble the quaternary S = (ω Hx ; ω̄ Hz) from full-rank CSS blocks and
/// compute k and the normalizer basis.
pub fn build_css(hx: &BinMatrix, hz: &BinMatrix) -> Result<StabilizerCode> {
    if hx.cols() != hz.cols() {
        return Err(Error::ShapeMismatch(format!(
            "Hx has {} columns, Hz has {}",
            hx.cols(),
            hz.cols()
        )));
    }
    let n = hx.cols();
    // CSS condition, reporting the first offending row pair.
    let prod = hx.mul(&hz.transpose())?;
    for i in 0..prod.rows() {
        for j in 0..prod.cols() {
            if prod.get(i, j) {
                return Err(Error::CssViolation { x_row: i, z_row: j });
            }
        }
    }
    let rx = gf2_rank(hx);
    let rz = gf2_rank(hz);
    if rx != hx.rows() {
        return Err(Error::Construction(format!(
            "Hx rows are dependent (rank {rx} < {}); pass full-rank blocks",
            hx.rows()
        )));
    }
    if rz != hz.rows() {
        return Err(Error::Construction(format!(
            "Hz rows are dependent (rank {rz} < {}); pass full-rank blocks",
            hz.rows()
        )));
    }
    let k = n - rx - rz;
    let mut rows = Vec::with_capacity(hx.rows() + hz.rows());
    for r in 0..hx.rows() {
        rows.push(
            (0..n)
                .filter(|&c| hx.get(r, c))
                .map(|c| (c, Gf4::OMEGA))
                .collect(),
        );
    }
    for r in 0..hz.rows() {
        rows.push(
            (0..n)
                .filter(|&c| hz.get(r, c))
                .map(|c| (c, Gf4::OMEGA_BAR))
                .collect(),
        );
    }
    let s = CheckMatrix::from_rows(n, rows)?;
    let sperp = normalizer_basis(&s)?;
    let check_weight_max = s.max_row_weight();
    Ok(StabilizerCode {
        s,
        sperp,
        hx: hx.clone(),
        hz: hz.clone(),
        n,
        k,
        check_weight_max,
        declared_distance: None,
        natural_blocks: None,
    })
}

/// Build the [[2d², 2, d]] toric code. The full-rank check matrix drops the
/// last vertex and last plaquette row (each is dependent on the rest).
pub fn build_toric(d: usize) -> Result<(StabilizerCode, ToricLayout)> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "toric lattice size must be at least 2, got {d}"
        )));
    }
    let layout = ToricLayout::new(d);
    let full_x = layout.vertex_matrix();
    let full_z = layout.plaquette_matrix();
    let keep = d * d - 1;
    let take_rows = |m: &BinMatrix| {
        BinMatrix::from_rows(&(0..keep).map(|r| m.row_to_vec(r)).collect::<Vec<_>>())
    };
    let mut code = build_css(&take_rows(&full_x), &take_rows(&full_z))?;
    code.declared_distance = Some(d);
    Ok((code, layout))
}

/// Build a generalized bicycle code from circulant polynomials: the blocks
/// are Hx' = (A B) and Hz' = (Bᵀ Aᵀ), and the complete row sets are kept as
/// a natural overcomplete check set.
pub fn build_gb(spec: &GbSpec) -> Result<StabilizerCode> {
    if spec.circ_size == 0 {
        return Err(Error::InvalidArgument("circulant size must be positive".into()));
    }
    if spec.a_exponents.is_empty() || spec.b_exponents.is_empty() {
        return Err(Error::InvalidArgument("circulant polynomials must be nonzero".into()));
    }
    let c = spec.circ_size;
    let a = circulant(c, &spec.a_exponents);
    let b = circulant(c, &spec.b_exponents);
    let full_hx = a.hstack(&b)?;
    let full_hz = b.transpose().hstack(&a.transpose())?;
    let rank = gf2_rank(&full_hx);
    let rank_z = gf2_rank(&full_hz);
    debug_assert_eq!(rank, rank_z);
    let rows_per_block = spec.rows_per_block.unwrap_or(rank);
    if rows_per_block > rank {
        return Err(Error::Construction(format!(
            "requested {rows_per_block} rows per block but the block rank is only {rank}"
        )));
    }
    // Lexicographically first independent rows, greedily per block.
    let select = |m: &BinMatrix| -> Result<BinMatrix> {
        let mut chosen = BinMatrix::zero(0, m.cols());
        let mut current_rank = 0;
        for r in 0..m.rows() {
            if chosen.rows() == rows_per_block {
                break;
            }
            let mut trial = chosen.clone();
            trial.append_row(&m.row_to_vec(r));
            if trial.rank() > current_rank {
                current_rank += 1;
                chosen = trial;
            }
        }
        if chosen.rows() < rows_per_block {
            return Err(Error::Construction(
                "selected rows are dependent; not enough independent rows".into(),
            ));
        }
        Ok(chosen)
    };
    let hx = select(&full_hx)?;
    let hz = select(&full_hz)?;
    let mut code = build_css(&hx, &hz)?;
    code.natural_blocks = Some((full_hx, full_hz));
    Ok(code)
}

/// The [7,4,3] BCH parity-check matrix used for both CSS blocks of the
/// [[7,1,3]] quantum BCH code.
pub fn bch_pcm() -> BinMatrix {
    BinMatrix::from_rows(&[
        vec![1, 0, 1, 0, 1, 0, 1],
        vec![0, 1, 1, 0, 0, 1, 1],
        vec![0, 0, 0, 1, 1, 1, 1],
    ])
}

/// The [[7,1,3]] quantum BCH code with S = (ω H_BCH ; ω̄ H_BCH).
pub fn build_bch713() -> StabilizerCode {
    let h = bch_pcm();
    let mut code = build_css(&h, &h).expect("BCH blocks are self-orthogonal");
    code.declared_distance = Some(3);
    code
}

/// JSON-compatible code configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeConfig {
    pub family: String,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub circ_size: Option<usize>,
    #[serde(default)]
    pub a_exponents: Option<Vec<usize>>,
    #[serde(default)]
    pub b_exponents: Option<Vec<usize>>,
    #[serde(default)]
    pub hx_file: Option<String>,
    #[serde(default)]
    pub hz_file: Option<String>,
    #[serde(default)]
    pub declared_distance: Option<usize>,
}

impl CodeConfig {
    pub fn from_json(text: &str) -> Result<CodeConfig> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<CodeConfig> {
        CodeConfig::from_json(&std::fs::read_to_string(path)?)
    }

    /// Build the configured code; the layout is present for toric codes.
    pub fn build(&self) -> Result<(StabilizerCode, Option<ToricLayout>)> {
        let mut built = match self.family.as_str() {
            "toric" => {
                let d = self.d.ok_or_else(|| {
                    Error::InvalidArgument("toric config requires field `d`".into())
                })?;
                let (code, layout) = build_toric(d)?;
                return Ok((code, Some(layout)));
            }
            "gb" => {
                let spec = GbSpec {
                    circ_size: self.circ_size.ok_or_else(|| {
                        Error::InvalidArgument("gb config requires `circ_size`".into())
                    })?,
                    a_exponents: self.a_exponents.clone().ok_or_else(|| {
                        Error::InvalidArgument("gb config requires `a_exponents`".into())
                    })?,
                    b_exponents: self.b_exponents.clone().ok_or_else(|| {
                        Error::InvalidArgument("gb config requires `b_exponents`".into())
                    })?,
                    rows_per_block: None,
                };
                build_gb(&spec)?
            }
            "css" => {
                let hx_file = self.hx_file.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("css config requires `hx_file`".into())
                })?;
                let hz_file = self.hz_file.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("css config requires `hz_file`".into())
                })?;
                let hx = BinMatrix::from_text(&std::fs::read_to_string(hx_file)?)?;
                let hz = BinMatrix::from_text(&std::fs::read_to_string(hz_file)?)?;
                build_css(&hx, &hz)?
            }
            "bch713" => build_bch713(),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown code family {other:?}"
                )))
            }
        };
        if self.declared_distance.is_some() {
            built.declared_distance = self.declared_distance;
        }
        Ok((built, None))
    }
}
