//! The refined log-domain BP4 decoder with scalar messages, optionally with
//! per-edge, per-iteration multiplicative weights. The same engine covers
//! plain BP4, OBP4 (overcomplete check matrix, redundant-row weight w_r) and
//! the neural NBP4/NOBP4 variants (trained weight sets).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{component_gates, trace_inner, CheckMatrix, Gf4, Gf4Vector};
use crate::error::{Error, Result};
use crate::overcomplete::OvercompleteCheckSet;

#[derive(Clone, Copy, Debug)]
pub struct DecoderConfig {
    /// Initialization probability ε₀ of the channel LLRs.
    pub epsilon0: f64,
    /// Maximum number of flooding iterations L.
    pub max_iterations: usize,
    /// Magnitude bound applied to messages and LLR components.
    pub message_clamp: f64,
    /// CN-message normalization for redundant checks; 1 disables it.
    pub wr: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            epsilon0: 0.1,
            max_iterations: 32,
            message_clamp: 30.0,
            wr: 1.0,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon0 > 0.0 && self.epsilon0 < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon0 must lie in (0,1), got {}",
                self.epsilon0
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        if self.message_clamp <= 0.0 {
            return Err(Error::InvalidArgument("message_clamp must be positive".into()));
        }
        Ok(())
    }
}

/// Channel LLR triple: all three components equal ln(3(1−ε₀)/ε₀).
pub fn init_channel_llr(config: &DecoderConfig) -> Result<[f64; 3]> {
    config.validate()?;
    let v = (3.0 * (1.0 - config.epsilon0) / config.epsilon0).ln();
    Ok([v; 3])
}

/// ln(1 + e^(−x)) in overflow-safe form.
pub(crate) fn softplus_neg(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// ln(e^(−a) + e^(−b)) in overflow-safe form.
pub(crate) fn lse_neg(a: f64, b: f64) -> f64 {
    let lo = a.min(b);
    -lo + (-(a - b).abs()).exp().ln_1p()
}

/// Belief quantization λ_η: the scalar LLR of the binary variable ⟨e, η⟩,
/// λ_η(Γ) = ln((1 + e^(−Γ^(η))) / Σ_{ζ≠0,ζ≠η} e^(−Γ^(ζ))), clamped.
pub fn belief_quantize(gamma: &[f64; 3], eta: Gf4, clamp: f64) -> f64 {
    let k = eta.nonzero_index().expect("eta must be nonzero");
    let (a, b) = match k {
        0 => (gamma[1], gamma[2]),
        1 => (gamma[0], gamma[2]),
        _ => (gamma[0], gamma[1]),
    };
    (softplus_neg(gamma[k]) - lse_neg(a, b)).clamp(-clamp, clamp)
}

/// The ⊞ combination rule: 2·tanh⁻¹(Π tanh(xᵢ/2)), computed pairwise with
/// clamped inputs. The empty sequence yields +clamp (the identity of ⊞).
pub fn boxplus(values: &[f64], clamp: f64) -> f64 {
    if values.is_empty() {
        return clamp;
    }
    let mut p = 1.0;
    for &x in values {
        p *= (x.clamp(-clamp, clamp) / 2.0).tanh();
    }
    (2.0 * p.atanh()).clamp(-clamp, clamp)
}

/// Tanner graph with precomputed adjacency, edge coefficients and the
/// per-component commutation gates used by the VN update.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    pub n: usize,
    pub m: usize,
    /// (check j, qubit i) per edge, enumerated row-major over the matrix.
    pub edges: Vec<(usize, usize)>,
    pub cn_edges: Vec<Vec<usize>>,
    pub vn_edges: Vec<Vec<usize>>,
    pub coeffs: Vec<Gf4>,
    /// gates[e][k]: trace_inner(ζ_k, coeff_e) = 1 for ζ in order (1, ω, ω̄).
    pub gates: Vec<[bool; 3]>,
}

impl TannerGraph {
    pub fn new(matrix: &CheckMatrix) -> TannerGraph {
        let m = matrix.m();
        let n = matrix.n();
        let mut edges = Vec::new();
        let mut cn_edges = vec![Vec::new(); m];
        let mut vn_edges = vec![Vec::new(); n];
        let mut coeffs = Vec::new();
        let mut gates = Vec::new();
        for j in 0..m {
            for &(i, c) in matrix.row(j) {
                let e = edges.len();
                edges.push((j, i));
                cn_edges[j].push(e);
                vn_edges[i].push(e);
                coeffs.push(c);
                gates.push(component_gates(c));
            }
        }
        TannerGraph {
            n,
            m,
            edges,
            cn_edges,
            vn_edges,
            coeffs,
            gates,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Syndrome of an error under the checks this graph was built from.
    pub fn syndrome(&self, e: &Gf4Vector) -> Result<Vec<u8>> {
        if e.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: e.len(),
            });
        }
        Ok(self
            .cn_edges
            .iter()
            .map(|edges| {
                edges.iter().fold(0u8, |acc, &e2| {
                    let (_, i) = self.edges[e2];
                    acc ^ trace_inner(e.get(i), self.coeffs[e2])
                })
            })
            .collect())
    }
}

/// Per-iteration, per-edge trainable weights bound to one Tanner graph.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    pub iterations: usize,
    /// Applied to VN→CN messages inside the CN update.
    pub wv_edge: Vec<Vec<f64>>,
    /// Applied to CN→VN messages inside the VN update and hard decision.
    pub wc_edge: Vec<Vec<f64>>,
    /// Applied to the channel LLRs.
    pub wv_node: Vec<Vec<f64>>,
}

impl WeightSet {
    pub fn ones(iterations: usize, graph: &TannerGraph) -> WeightSet {
        WeightSet {
            iterations,
            wv_edge: vec![vec![1.0; graph.num_edges()]; iterations],
            wc_edge: vec![vec![1.0; graph.num_edges()]; iterations],
            wv_node: vec![vec![1.0; graph.n]; iterations],
        }
    }

    /// The paper's initialization: everything 1 except w_c, which starts at
    /// w_r on the edges of redundant checks.
    pub fn initial(
        iterations: usize,
        graph: &TannerGraph,
        wr: f64,
        redundant: Option<&[bool]>,
    ) -> WeightSet {
        let mut w = WeightSet::ones(iterations, graph);
        if let Some(red) = redundant {
            for l in 0..iterations {
                for (e, &(j, _)) in graph.edges.iter().enumerate() {
                    if red[j] {
                        w.wc_edge[l][e] = wr;
                    }
                }
            }
        }
        w
    }

    pub fn num_params(&self) -> usize {
        self.iterations * (self.wv_edge[0].len() + self.wc_edge[0].len() + self.wv_node[0].len())
    }

    /// Flat parameter layout: per iteration wv_edge, wc_edge, wv_node.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_params());
        for l in 0..self.iterations {
            v.extend_from_slice(&self.wv_edge[l]);
            v.extend_from_slice(&self.wc_edge[l]);
            v.extend_from_slice(&self.wv_node[l]);
        }
        v
    }

    pub fn assign_from_flat(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        for l in 0..self.iterations {
            for w in self.wv_edge[l].iter_mut() {
                *w = *it.next().unwrap();
            }
            for w in self.wc_edge[l].iter_mut() {
                *w = *it.next().unwrap();
            }
            for w in self.wv_node[l].iter_mut() {
                *w = *it.next().unwrap();
            }
        }
        debug_assert!(it.next().is_none());
    }
}

/// On-disk weight format.
#[derive(Serialize, Deserialize)]
pub struct WeightFile {
    pub format_version: u32,
    pub code_hash: String,
    #[serde(rename = "L")]
    pub iterations: usize,
    pub epsilon0: f64,
    pub wr: f64,
    pub edges: Vec<(usize, usize)>,
    pub wv_edge: Vec<Vec<f64>>,
    pub wc_edge: Vec<Vec<f64>>,
    pub wv_node: Vec<Vec<f64>>,
}

/// Hash identifying the check matrix a weight set was trained against.
pub fn check_matrix_hash(matrix: &CheckMatrix) -> String {
    let mut hasher = Sha256::new();
    hasher.update(matrix.to_text().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl WeightFile {
    pub fn new(
        weights: &WeightSet,
        graph: &TannerGraph,
        matrix: &CheckMatrix,
        config: &DecoderConfig,
    ) -> WeightFile {
        WeightFile {
            format_version: 1,
            code_hash: check_matrix_hash(matrix),
            iterations: weights.iterations,
            epsilon0: config.epsilon0,
            wr: config.wr,
            edges: graph.edges.clone(),
            wv_edge: weights.wv_edge.clone(),
            wc_edge: weights.wc_edge.clone(),
            wv_node: weights.wv_node.clone(),
        }
    }

    pub fn to_weight_set(&self) -> WeightSet {
        WeightSet {
            iterations: self.iterations,
            wv_edge: self.wv_edge.clone(),
            wc_edge: self.wc_edge.clone(),
            wv_node: self.wv_node.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<WeightFile> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Result of one decode call.
#[derive(Clone, Debug)]
pub struct DecodeRecord {
    pub e_hat: Gf4Vector,
    pub matched: bool,
    pub iterations_used: usize,
    /// Hard-decision LLR triples per iteration, retained on request.
    pub gammas: Option<Vec<Vec<[f64; 3]>>>,
}

trait Weighting {
    fn wv_edge(&self, l: usize, e: usize) -> f64;
    fn wc_edge(&self, l: usize, e: usize) -> f64;
    fn wv_node(&self, l: usize, i: usize) -> f64;
}

struct UnitWeights;

impl Weighting for UnitWeights {
    fn wv_edge(&self, _: usize, _: usize) -> f64 {
        1.0
    }
    fn wc_edge(&self, _: usize, _: usize) -> f64 {
        1.0
    }
    fn wv_node(&self, _: usize, _: usize) -> f64 {
        1.0
    }
}

/// Iteration-independent per-edge CN weights, the OBP4 w_r case.
struct StaticWc<'a> {
    wc: &'a [f64],
}

impl Weighting for StaticWc<'_> {
    fn wv_edge(&self, _: usize, _: usize) -> f64 {
        1.0
    }
    fn wc_edge(&self, _: usize, e: usize) -> f64 {
        self.wc[e]
    }
    fn wv_node(&self, _: usize, _: usize) -> f64 {
        1.0
    }
}

impl Weighting for &WeightSet {
    fn wv_edge(&self, l: usize, e: usize) -> f64 {
        self.wv_edge[l][e]
    }
    fn wc_edge(&self, l: usize, e: usize) -> f64 {
        self.wc_edge[l][e]
    }
    fn wv_node(&self, l: usize, i: usize) -> f64 {
        self.wv_node[l][i]
    }
}

/// A BP4 decoder bound to one check matrix (plain or overcomplete).
pub struct Bp4Decoder {
    graph: TannerGraph,
    config: DecoderConfig,
    /// Per-edge CN weight used when no trained weight set is supplied:
    /// w_r on redundant rows, 1 elsewhere.
    default_wc: Vec<f64>,
    default_is_unit: bool,
}

impl Bp4Decoder {
    pub fn new(matrix: &CheckMatrix, config: DecoderConfig) -> Result<Bp4Decoder> {
        config.validate()?;
        let graph = TannerGraph::new(matrix);
        let default_wc = vec![1.0; graph.num_edges()];
        Ok(Bp4Decoder {
            graph,
            config,
            default_wc,
            default_is_unit: true,
        })
    }

    /// Bind to an overcomplete set; redundant rows get w_r as default CN weight.
    pub fn for_overcomplete(oc: &OvercompleteCheckSet, config: DecoderConfig) -> Result<Bp4Decoder> {
        config.validate()?;
        let graph = TannerGraph::new(&oc.hoc);
        let default_wc: Vec<f64> = graph
            .edges
            .iter()
            .map(|&(j, _)| if oc.redundant[j] { config.wr } else { 1.0 })
            .collect();
        let default_is_unit = default_wc.iter().all(|&w| w == 1.0);
        Ok(Bp4Decoder {
            graph,
            config,
            default_wc,
            default_is_unit,
        })
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    /// Training starting point: all weights 1, except w_c = w_r on the edges
    /// of redundant checks.
    pub fn initial_weights(&self) -> WeightSet {
        let mut w = WeightSet::ones(self.config.max_iterations, &self.graph);
        for l in 0..w.iterations {
            w.wc_edge[l].copy_from_slice(&self.default_wc);
        }
        w
    }

    /// Decode a syndrome. Without a weight set this is plain BP4 (or OBP4
    /// with the w_r default on redundant rows).
    pub fn decode(&self, z: &[u8], weights: Option<&WeightSet>) -> Result<DecodeRecord> {
        self.run_checked(z, weights, true, false)
    }

    /// Training-mode forward pass: all L iterations, no early stop, with
    /// per-iteration hard-decision LLR snapshots.
    pub fn decode_unrolled(&self, z: &[u8], weights: Option<&WeightSet>) -> Result<DecodeRecord> {
        self.run_checked(z, weights, false, true)
    }

    fn run_checked(
        &self,
        z: &[u8],
        weights: Option<&WeightSet>,
        early_stop: bool,
        record: bool,
    ) -> Result<DecodeRecord> {
        if z.len() != self.graph.m {
            return Err(Error::LengthMismatch {
                expected: self.graph.m,
                got: z.len(),
            });
        }
        if let Some(w) = weights {
            if w.iterations != self.config.max_iterations
                || w.wv_edge[0].len() != self.graph.num_edges()
                || w.wv_node[0].len() != self.graph.n
            {
                return Err(Error::ShapeMismatch(
                    "weight set does not match the decoder's graph and L".into(),
                ));
            }
            Ok(self.run(z, &w, early_stop, record))
        } else if self.default_is_unit {
            Ok(self.run(z, &UnitWeights, early_stop, record))
        } else {
            let w = StaticWc {
                wc: &self.default_wc,
            };
            Ok(self.run(z, &w, early_stop, record))
        }
    }

    fn run<W: Weighting>(&self, z: &[u8], w: &W, early_stop: bool, record: bool) -> DecodeRecord {
        let g = &self.graph;
        let clamp = self.config.message_clamp;
        let chan = (3.0 * (1.0 - self.config.epsilon0) / self.config.epsilon0).ln();
        let chan_triple = [chan; 3];

        // Initial VN messages: quantized channel beliefs per edge coefficient.
        let mut lambda: Vec<f64> = g
            .coeffs
            .iter()
            .map(|&c| belief_quantize(&chan_triple, c, clamp))
            .collect();
        let mut delta = vec![0.0f64; g.num_edges()];
        let mut e_hat = Gf4Vector::zero(g.n);
        let mut gammas = if record { Some(Vec::new()) } else { None };
        let mut matched = false;
        let mut iterations_used = self.config.max_iterations;

        for l in 0..self.config.max_iterations {
            // CN update with prefix/suffix tanh products.
            for (j, edges) in g.cn_edges.iter().enumerate() {
                let sign = if z[j] == 1 { -1.0 } else { 1.0 };
                let deg = edges.len();
                let t: Vec<f64> = edges
                    .iter()
                    .map(|&e| ((w.wv_edge(l, e) * lambda[e]).clamp(-clamp, clamp) / 2.0).tanh())
                    .collect();
                let mut prefix = vec![1.0f64; deg + 1];
                for q in 0..deg {
                    prefix[q + 1] = prefix[q] * t[q];
                }
                let mut suffix = vec![1.0f64; deg + 1];
                for q in (0..deg).rev() {
                    suffix[q] = suffix[q + 1] * t[q];
                }
                for (q, &e) in edges.iter().enumerate() {
                    let p = prefix[q] * suffix[q + 1];
                    let msg = if deg == 1 {
                        clamp // empty boxplus
                    } else {
                        (2.0 * p.atanh()).clamp(-clamp, clamp)
                    };
                    delta[e] = sign * msg;
                }
            }

            // Hard decision from the full (non-extrinsic) sums.
            let mut gamma_hard = vec![[0.0f64; 3]; g.n];
            for i in 0..g.n {
                for k in 0..3 {
                    let mut acc = w.wv_node(l, i) * chan;
                    for &e in &g.vn_edges[i] {
                        if g.gates[e][k] {
                            acc += w.wc_edge(l, e) * delta[e];
                        }
                    }
                    gamma_hard[i][k] = acc.clamp(-clamp, clamp);
                }
                e_hat.set(i, hard_decide(&gamma_hard[i]));
            }
            if let Some(rec) = gammas.as_mut() {
                rec.push(gamma_hard);
            }

            // Syndrome check on the matrix in use.
            let ok = g.cn_edges.iter().enumerate().all(|(j, edges)| {
                let mut acc = 0u8;
                for &e in edges {
                    let (_, i) = g.edges[e];
                    acc ^= trace_inner(e_hat.get(i), g.coeffs[e]);
                }
                acc == z[j]
            });
            if ok {
                matched = true;
                iterations_used = l + 1;
                if early_stop {
                    break;
                }
            }
            if matched && early_stop {
                break;
            }

            // VN update: extrinsic LLR triples, then belief quantization.
            let mut new_lambda = vec![0.0f64; g.num_edges()];
            for i in 0..g.n {
                for &e in &g.vn_edges[i] {
                    let mut gamma = [0.0f64; 3];
                    for k in 0..3 {
                        let mut acc = w.wv_node(l, i) * chan;
                        for &e2 in &g.vn_edges[i] {
                            if e2 != e && g.gates[e2][k] {
                                acc += w.wc_edge(l, e2) * delta[e2];
                            }
                        }
                        gamma[k] = acc.clamp(-clamp, clamp);
                    }
                    new_lambda[e] = belief_quantize(&gamma, g.coeffs[e], clamp);
                }
            }
            lambda = new_lambda;
        }
        if !matched {
            iterations_used = self.config.max_iterations;
        }
        DecodeRecord {
            e_hat,
            matched,
            iterations_used,
            gammas,
        }
    }
}

/// Componentwise decision: all-positive means no error; otherwise the
/// minimizing component with the fixed tie order 1 < ω < ω̄.
fn hard_decide(gamma: &[f64; 3]) -> Gf4 {
    if gamma.iter().all(|&v| v > 0.0) {
        return Gf4::ZERO;
    }
    let mut best = 0;
    for k in 1..3 {
        if gamma[k] < gamma[best] {
            best = k;
        }
    }
    Gf4::NONZERO[best]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::extract_syndrome;
    use crate::codes::{build_bch713, build_toric};
    use crate::overcomplete::{combinations_all, remap_syndrome};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config(eps0: f64, l: usize) -> DecoderConfig {
        DecoderConfig {
            epsilon0: eps0,
            max_iterations: l,
            ..DecoderConfig::default()
        }
    }

    #[test]
    fn channel_llr_values() {
        let v = init_channel_llr(&config(0.75, 1)).unwrap();
        assert!(v.iter().all(|&x| x.abs() < 1e-12));
        let v = init_channel_llr(&config(0.1, 1)).unwrap();
        assert!((v[0] - 27f64.ln()).abs() < 1e-12);
        assert!((v[0] - 3.2958).abs() < 1e-4);
        let v = init_channel_llr(&config(0.5, 1)).unwrap();
        assert!((v[0] - 3f64.ln()).abs() < 1e-12);
        assert!(init_channel_llr(&config(0.0, 1)).is_err());
    }

    #[test]
    fn quantize_values() {
        let ln27 = 27f64.ln();
        for eta in Gf4::NONZERO {
            let q = belief_quantize(&[ln27; 3], eta, 30.0);
            assert!((q - 14f64.ln()).abs() < 1e-12);
            assert!((q - 2.639).abs() < 5e-4);
            assert!(belief_quantize(&[0.0; 3], eta, 30.0).abs() < 1e-12);
        }
        // saturation stays clamped
        let q = belief_quantize(&[100.0, 100.0, 100.0], Gf4::ONE, 30.0);
        assert!(q <= 30.0);
        let q = belief_quantize(&[1000.0, 500.0, 500.0], Gf4::ONE, 30.0);
        assert_eq!(q, 30.0);
    }

    #[test]
    fn boxplus_values() {
        let lam = 14f64.ln();
        let b = boxplus(&[lam, lam, lam], 30.0);
        assert!((b - 1.556).abs() < 5e-3, "{b}");
        assert_eq!(boxplus(&[1.3, 0.0, -2.0], 30.0), 0.0);
        assert!((boxplus(&[0.7], 30.0) - 0.7).abs() < 1e-12);
        assert_eq!(boxplus(&[], 30.0), 30.0);
    }

    #[test]
    fn zero_syndrome_decodes_to_zero_immediately() {
        let code = build_bch713();
        let dec = Bp4Decoder::new(&code.s, config(0.1, 8)).unwrap();
        let rec = dec.decode(&vec![0; 6], None).unwrap();
        assert!(rec.matched);
        assert_eq!(rec.iterations_used, 1);
        assert_eq!(rec.e_hat.weight(), 0);
    }

    #[test]
    fn bch_worked_example_plain_and_overcomplete() {
        let code = build_bch713();
        let mut e = Gf4Vector::zero(7);
        e.set(6, Gf4::ONE);
        let z = extract_syndrome(&code.s, &e).unwrap();

        let dec = Bp4Decoder::new(&code.s, config(0.1, 8)).unwrap();
        let rec = dec.decode(&z, None).unwrap();
        assert!(rec.matched);
        assert_eq!(rec.iterations_used, 1);
        assert_eq!(rec.e_hat.to_string(), "IIYIYYY");

        let oc = combinations_all(&code).unwrap();
        let zoc = remap_syndrome(&oc.m_map, &z).unwrap();
        let dec = Bp4Decoder::for_overcomplete(&oc, config(0.1, 8)).unwrap();
        let rec = dec.decode(&zoc, None).unwrap();
        assert!(rec.matched);
        assert_eq!(rec.iterations_used, 1);
        assert_eq!(rec.e_hat.to_string(), "IIIIIIY");
    }

    #[test]
    fn unit_weights_match_plain_path_bit_for_bit() {
        let (code, _) = build_toric(3).unwrap();
        let dec = Bp4Decoder::new(&code.s, config(0.08, 10)).unwrap();
        let ch = crate::channel::DepolarizingChannel::new(0.08).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let units = WeightSet::ones(10, dec.graph());
        for _ in 0..30 {
            let e = ch.sample_error(code.n, &mut rng);
            let z = extract_syndrome(&code.s, &e).unwrap();
            let plain = dec.decode_unrolled(&z, None).unwrap();
            let weighted = dec.decode_unrolled(&z, Some(&units)).unwrap();
            assert_eq!(plain.e_hat, weighted.e_hat);
            assert_eq!(plain.gammas, weighted.gammas);
        }
    }

    #[test]
    fn matched_flag_implies_exact_syndrome() {
        let (code, _) = build_toric(3).unwrap();
        let dec = Bp4Decoder::new(&code.s, config(0.05, 16)).unwrap();
        let ch = crate::channel::DepolarizingChannel::new(0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let e = ch.sample_error(code.n, &mut rng);
            let z = extract_syndrome(&code.s, &e).unwrap();
            let rec = dec.decode(&z, None).unwrap();
            if rec.matched {
                assert_eq!(extract_syndrome(&code.s, &rec.e_hat).unwrap(), z);
            }
        }
    }

    #[test]
    fn messages_stay_clamped() {
        let code = build_bch713();
        let cfg = DecoderConfig {
            epsilon0: 0.001,
            max_iterations: 20,
            message_clamp: 8.0,
            wr: 1.0,
        };
        let dec = Bp4Decoder::new(&code.s, cfg).unwrap();
        let rec = dec.decode_unrolled(&vec![1; 6], None).unwrap();
        for snapshot in rec.gammas.unwrap() {
            for triple in snapshot {
                for v in triple {
                    assert!(v.abs() <= 8.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let code = build_bch713();
        let dec = Bp4Decoder::new(&code.s, config(0.1, 4)).unwrap();
        assert!(dec.decode(&vec![0; 5], None).is_err());
    }

    #[test]
    fn weight_file_round_trip() {
        let code = build_bch713();
        let cfg = config(0.1, 3);
        let dec = Bp4Decoder::new(&code.s, cfg).unwrap();
        let mut w = WeightSet::ones(3, dec.graph());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut flat = w.flatten();
        for v in flat.iter_mut() {
            *v = rng.random_range(0.1..2.0);
        }
        w.assign_from_flat(&flat);
        let file = WeightFile::new(&w, dec.graph(), &code.s, &cfg);
        let rt = WeightFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(rt.to_weight_set(), w);
        assert_eq!(rt.code_hash, check_matrix_hash(&code.s));
    }

    #[test]
    fn vn_gate_structure_on_bch_vn7() {
        // VN 7 has 3 omega edges and 3 omega-bar edges; the Y component sees
        // all six, the X component only the omega-bar edges.
        let code = build_bch713();
        let g = TannerGraph::new(&code.s);
        let edges = &g.vn_edges[6];
        assert_eq!(edges.len(), 6);
        let count = |k: usize| edges.iter().filter(|&&e| g.gates[e][k]).count();
        assert_eq!(count(0), 6);
        assert_eq!(count(1), 3);
        assert_eq!(count(2), 3);
    }
}
