//! Degeneracy-aware training of the weighted BP4 decoder: the soft-modulo
//! loss, reverse-mode gradients through the unrolled decoder, and plain SGD.

use rayon::prelude::*;

use crate::algebra::{trace_inner, Gf4, Gf4Vector, NormalizerMatrix};
use crate::channel::{trial_rng, DepolarizingChannel};
use crate::decoder::{belief_quantize, lse_neg, softplus_neg, Bp4Decoder, WeightSet};
use crate::error::{Error, Result};

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let t = x.exp();
        t / (1.0 + t)
    }
}

/// The soft-modulo-2 map f(x) = |sin(πx/2)|, zero at every even integer.
pub fn soft_mod(x: f64) -> f64 {
    (std::f64::consts::FRAC_PI_2 * x).sin().abs()
}

/// P(⟨ê_i, η⟩ = 1 | z) as estimated from the hard-decision LLR triple:
/// the logistic of the quantized belief λ_η(Γ_i).
pub fn commute_prob(gamma: &[f64; 3], eta: Gf4, clamp: f64) -> f64 {
    sigmoid(belief_quantize(gamma, eta, clamp))
}

/// The per-pattern loss: for each normalizer row, sum the per-position
/// probabilities that the row entry is violated by the estimate — the
/// complement of `commute_prob` where the true error commutes with the
/// entry, `commute_prob` itself where it anticommutes — and penalize row
/// sums away from even integers. A degenerate estimate (ê = e + stabilizer)
/// violates every row an even number of times, so saturated beliefs give
/// zero loss exactly on Type I/II successes.
pub fn pattern_loss(
    gammas: &[[f64; 3]],
    e: &Gf4Vector,
    sperp: &NormalizerMatrix,
    clamp: f64,
) -> Result<f64> {
    if gammas.len() != e.len() {
        return Err(Error::LengthMismatch {
            expected: e.len(),
            got: gammas.len(),
        });
    }
    let mut loss = 0.0;
    for j in 0..sperp.num_rows() {
        let row = sperp.row(j);
        if row.len() != e.len() {
            return Err(Error::LengthMismatch {
                expected: e.len(),
                got: row.len(),
            });
        }
        let mut acc = 0.0;
        for i in 0..e.len() {
            let eta = row.get(i);
            if eta == Gf4::ZERO {
                continue;
            }
            let p = commute_prob(&gammas[i], eta, clamp);
            acc += if trace_inner(e.get(i), eta) == 1 {
                p
            } else {
                1.0 - p
            };
        }
        loss += soft_mod(acc);
    }
    Ok(loss)
}

/// Loss of one error pattern through the unrolled decoder: the minimum of
/// the per-iteration losses, with the earliest iteration breaking ties.
#[derive(Clone, Copy, Debug)]
pub struct LossValue {
    pub value: f64,
    /// 0-based index of the iteration achieving the minimum.
    pub chosen_iteration: usize,
}

fn select_min(losses: &[f64]) -> LossValue {
    let mut best = 0;
    for (l, &v) in losses.iter().enumerate() {
        if v < losses[best] {
            best = l;
        }
    }
    LossValue {
        value: losses[best],
        chosen_iteration: best,
    }
}

/// Forward-only loss evaluation; serves as the finite-difference oracle for
/// the analytic gradient.
pub fn unrolled_loss(
    decoder: &Bp4Decoder,
    sperp: &NormalizerMatrix,
    e: &Gf4Vector,
    weights: &WeightSet,
) -> Result<LossValue> {
    let z = decoder.graph().syndrome(e)?;
    let rec = decoder.decode_unrolled(&z, Some(weights))?;
    let gammas = rec.gammas.expect("unrolled decode records gammas");
    let clamp = decoder.config().message_clamp;
    let losses: Vec<f64> = gammas
        .iter()
        .map(|g| pattern_loss(g, e, sperp, clamp))
        .collect::<Result<_>>()?;
    Ok(select_min(&losses))
}

// ---------------------------------------------------------------------------
// Reverse-mode tape
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Op {
    /// Trainable parameter; payload is the flat parameter index.
    Leaf(usize),
    Const,
    Mul(u32, u32),
    /// Multiply by the constant stored in `aux`.
    Scale(u32),
    Sub(u32, u32),
    OneMinus(u32),
    Sum(Box<[u32]>),
    /// tanh(x/2)
    TanhHalf(u32),
    /// 2·atanh(x)
    Atanh2(u32),
    /// clamp to ±aux; gradient passes only strictly inside the interval
    Clamp(u32),
    /// ln(1+e^(−x))
    SoftplusNeg(u32),
    /// ln(e^(−a)+e^(−b))
    LseNeg(u32, u32),
    Sigmoid(u32),
    /// |sin(πx/2)| with zero subgradient at the zeros
    SoftMod(u32),
}

struct Tape {
    ops: Vec<Op>,
    aux: Vec<f64>,
    vals: Vec<f64>,
}

impl Tape {
    fn new() -> Tape {
        Tape {
            ops: Vec::new(),
            aux: Vec::new(),
            vals: Vec::new(),
        }
    }

    fn push(&mut self, op: Op, aux: f64, val: f64) -> u32 {
        let id = self.vals.len() as u32;
        self.ops.push(op);
        self.aux.push(aux);
        self.vals.push(val);
        id
    }

    fn val(&self, id: u32) -> f64 {
        self.vals[id as usize]
    }

    fn leaf(&mut self, param: usize, value: f64) -> u32 {
        self.push(Op::Leaf(param), 0.0, value)
    }

    fn constant(&mut self, value: f64) -> u32 {
        self.push(Op::Const, 0.0, value)
    }

    fn mul(&mut self, a: u32, b: u32) -> u32 {
        let v = self.val(a) * self.val(b);
        self.push(Op::Mul(a, b), 0.0, v)
    }

    fn scale(&mut self, a: u32, factor: f64) -> u32 {
        let v = self.val(a) * factor;
        self.push(Op::Scale(a), factor, v)
    }

    fn sub(&mut self, a: u32, b: u32) -> u32 {
        let v = self.val(a) - self.val(b);
        self.push(Op::Sub(a, b), 0.0, v)
    }

    fn one_minus(&mut self, a: u32) -> u32 {
        let v = 1.0 - self.val(a);
        self.push(Op::OneMinus(a), 0.0, v)
    }

    fn sum(&mut self, terms: &[u32]) -> u32 {
        let v = terms.iter().fold(0.0, |acc, &t| acc + self.val(t));
        self.push(Op::Sum(terms.into()), 0.0, v)
    }

    fn tanh_half(&mut self, a: u32) -> u32 {
        let v = (self.val(a) / 2.0).tanh();
        self.push(Op::TanhHalf(a), 0.0, v)
    }

    fn atanh2(&mut self, a: u32) -> u32 {
        let v = 2.0 * self.val(a).atanh();
        self.push(Op::Atanh2(a), 0.0, v)
    }

    fn clamp(&mut self, a: u32, bound: f64) -> u32 {
        let v = self.val(a).clamp(-bound, bound);
        self.push(Op::Clamp(a), bound, v)
    }

    fn softplus_neg(&mut self, a: u32) -> u32 {
        let v = softplus_neg(self.val(a));
        self.push(Op::SoftplusNeg(a), 0.0, v)
    }

    fn lse_neg(&mut self, a: u32, b: u32) -> u32 {
        let v = lse_neg(self.val(a), self.val(b));
        self.push(Op::LseNeg(a, b), 0.0, v)
    }

    fn sigmoid(&mut self, a: u32) -> u32 {
        let v = sigmoid(self.val(a));
        self.push(Op::Sigmoid(a), 0.0, v)
    }

    fn soft_mod(&mut self, a: u32) -> u32 {
        let v = soft_mod(self.val(a));
        self.push(Op::SoftMod(a), 0.0, v)
    }

    /// λ_η over three component nodes, mirroring belief_quantize.
    fn quantize(&mut self, gamma: [u32; 3], eta_index: usize, clamp: f64) -> u32 {
        let (a, b) = match eta_index {
            0 => (gamma[1], gamma[2]),
            1 => (gamma[0], gamma[2]),
            _ => (gamma[0], gamma[1]),
        };
        let num = self.softplus_neg(gamma[eta_index]);
        let den = self.lse_neg(a, b);
        let d = self.sub(num, den);
        self.clamp(d, clamp)
    }

    fn backward(&self, seed: u32, num_params: usize) -> Vec<f64> {
        let mut adj = vec![0.0f64; self.vals.len()];
        let mut grads = vec![0.0f64; num_params];
        adj[seed as usize] = 1.0;
        for id in (0..self.vals.len()).rev() {
            let g = adj[id];
            if g == 0.0 {
                continue;
            }
            match &self.ops[id] {
                Op::Leaf(p) => grads[*p] += g,
                Op::Const => {}
                Op::Mul(a, b) => {
                    adj[*a as usize] += g * self.vals[*b as usize];
                    adj[*b as usize] += g * self.vals[*a as usize];
                }
                Op::Scale(a) => adj[*a as usize] += g * self.aux[id],
                Op::Sub(a, b) => {
                    adj[*a as usize] += g;
                    adj[*b as usize] -= g;
                }
                Op::OneMinus(a) => adj[*a as usize] -= g,
                Op::Sum(terms) => {
                    for &t in terms.iter() {
                        adj[t as usize] += g;
                    }
                }
                Op::TanhHalf(a) => {
                    let y = self.vals[id];
                    adj[*a as usize] += g * (1.0 - y * y) / 2.0;
                }
                Op::Atanh2(a) => {
                    let x = self.vals[*a as usize];
                    adj[*a as usize] += g * 2.0 / (1.0 - x * x);
                }
                Op::Clamp(a) => {
                    let x = self.vals[*a as usize];
                    if x > -self.aux[id] && x < self.aux[id] {
                        adj[*a as usize] += g;
                    }
                }
                Op::SoftplusNeg(a) => {
                    let x = self.vals[*a as usize];
                    adj[*a as usize] -= g * sigmoid(-x);
                }
                Op::LseNeg(a, b) => {
                    let xa = self.vals[*a as usize];
                    let xb = self.vals[*b as usize];
                    adj[*a as usize] -= g * sigmoid(xb - xa);
                    adj[*b as usize] -= g * sigmoid(xa - xb);
                }
                Op::Sigmoid(a) => {
                    let y = self.vals[id];
                    adj[*a as usize] += g * y * (1.0 - y);
                }
                Op::SoftMod(a) => {
                    let x = self.vals[*a as usize];
                    let s = (std::f64::consts::FRAC_PI_2 * x).sin();
                    if s != 0.0 {
                        let d = s.signum()
                            * std::f64::consts::FRAC_PI_2
                            * (std::f64::consts::FRAC_PI_2 * x).cos();
                        adj[*a as usize] += g * d;
                    }
                }
            }
        }
        grads
    }
}

/// Analytic gradient of `unrolled_loss` with respect to every entry of the
/// weight set (in flat layout), backpropagated through the chosen
/// minimum-loss iteration only.
pub fn loss_gradient(
    decoder: &Bp4Decoder,
    sperp: &NormalizerMatrix,
    e: &Gf4Vector,
    weights: &WeightSet,
) -> Result<(LossValue, Vec<f64>)> {
    let g = decoder.graph();
    let cfg = decoder.config();
    if weights.iterations != cfg.max_iterations
        || weights.wv_edge[0].len() != g.num_edges()
        || weights.wv_node[0].len() != g.n
    {
        return Err(Error::ShapeMismatch(
            "weight set does not match the decoder's graph and L".into(),
        ));
    }
    let z = g.syndrome(e)?;
    let clamp = cfg.message_clamp;
    let chan = (3.0 * (1.0 - cfg.epsilon0) / cfg.epsilon0).ln();
    let big_l = cfg.max_iterations;
    let ne = g.num_edges();
    let stride = 2 * ne + g.n;
    let num_params = big_l * stride;

    // Precompute the loss structure: per normalizer row, the nonzero
    // positions with their component index and the true-error complement bit.
    let mut rows: Vec<Vec<(usize, usize, bool)>> = Vec::with_capacity(sperp.num_rows());
    for j in 0..sperp.num_rows() {
        let row = sperp.row(j);
        if row.len() != g.n || e.len() != g.n {
            return Err(Error::LengthMismatch {
                expected: g.n,
                got: row.len().min(e.len()),
            });
        }
        let mut entries = Vec::new();
        for i in 0..g.n {
            let eta = row.get(i);
            if eta != Gf4::ZERO {
                entries.push((
                    i,
                    eta.nonzero_index().unwrap(),
                    trace_inner(e.get(i), eta) == 1,
                ));
            }
        }
        rows.push(entries);
    }

    let mut tape = Tape::new();
    // Parameter leaves first, ids equal to the flat parameter indices.
    let flat = weights.flatten();
    let mut leaf = Vec::with_capacity(num_params);
    for (p, &v) in flat.iter().enumerate() {
        leaf.push(tape.leaf(p, v));
    }
    let wv_edge = |l: usize, e2: usize| leaf[l * stride + e2];
    let wc_edge = |l: usize, e2: usize| leaf[l * stride + ne + e2];
    let wv_node = |l: usize, i: usize| leaf[l * stride + 2 * ne + i];

    let chan_node = tape.constant(chan);
    let one = tape.constant(1.0);
    let chan_triple = [chan; 3];
    let mut lambda: Vec<u32> = g
        .coeffs
        .iter()
        .map(|&c| {
            let v = belief_quantize(&chan_triple, c, clamp);
            tape.constant(v)
        })
        .collect();

    let mut loss_nodes = Vec::with_capacity(big_l);
    for l in 0..big_l {
        // CN update.
        let mut delta = vec![0u32; ne];
        for (j, edges) in g.cn_edges.iter().enumerate() {
            let sign = if z[j] == 1 { -1.0 } else { 1.0 };
            let deg = edges.len();
            let t: Vec<u32> = edges
                .iter()
                .map(|&e2| {
                    let x = tape.mul(wv_edge(l, e2), lambda[e2]);
                    let x = tape.clamp(x, clamp);
                    tape.tanh_half(x)
                })
                .collect();
            let mut prefix = vec![one; deg + 1];
            for q in 0..deg {
                prefix[q + 1] = tape.mul(prefix[q], t[q]);
            }
            let mut suffix = vec![one; deg + 1];
            for q in (0..deg).rev() {
                suffix[q] = tape.mul(suffix[q + 1], t[q]);
            }
            for (q, &e2) in edges.iter().enumerate() {
                let msg = if deg == 1 {
                    tape.constant(clamp)
                } else {
                    let p = tape.mul(prefix[q], suffix[q + 1]);
                    let a = tape.atanh2(p);
                    tape.clamp(a, clamp)
                };
                delta[e2] = tape.scale(msg, sign);
            }
        }

        // Shared product nodes for the VN-side sums.
        let wc_delta: Vec<u32> = (0..ne).map(|e2| tape.mul(wc_edge(l, e2), delta[e2])).collect();
        let chan_term: Vec<u32> = (0..g.n).map(|i| tape.mul(wv_node(l, i), chan_node)).collect();

        // Hard-decision LLR triples.
        let mut gamma_hard = vec![[0u32; 3]; g.n];
        for i in 0..g.n {
            for k in 0..3 {
                let mut terms = vec![chan_term[i]];
                for &e2 in &g.vn_edges[i] {
                    if g.gates[e2][k] {
                        terms.push(wc_delta[e2]);
                    }
                }
                let s = tape.sum(&terms);
                gamma_hard[i][k] = tape.clamp(s, clamp);
            }
        }

        // Per-iteration loss.
        let mut row_losses = Vec::with_capacity(rows.len());
        for entries in &rows {
            let mut terms = Vec::with_capacity(entries.len());
            for &(i, eta_idx, complement) in entries {
                let lam = tape.quantize(gamma_hard[i], eta_idx, clamp);
                let p = tape.sigmoid(lam);
                terms.push(if complement { p } else { tape.one_minus(p) });
            }
            let s = tape.sum(&terms);
            row_losses.push(tape.soft_mod(s));
        }
        loss_nodes.push(tape.sum(&row_losses));

        // VN update (skipped after the final iteration).
        if l + 1 == big_l {
            break;
        }
        let mut new_lambda = vec![0u32; ne];
        for i in 0..g.n {
            for &e2 in &g.vn_edges[i] {
                let mut gamma = [0u32; 3];
                for (k, slot) in gamma.iter_mut().enumerate() {
                    let mut terms = vec![chan_term[i]];
                    for &e3 in &g.vn_edges[i] {
                        if e3 != e2 && g.gates[e3][k] {
                            terms.push(wc_delta[e3]);
                        }
                    }
                    let s = tape.sum(&terms);
                    *slot = tape.clamp(s, clamp);
                }
                let eta_idx = g.coeffs[e2].nonzero_index().unwrap();
                new_lambda[e2] = tape.quantize(gamma, eta_idx, clamp);
            }
        }
        lambda = new_lambda;
    }

    let losses: Vec<f64> = loss_nodes.iter().map(|&id| tape.val(id)).collect();
    let chosen = select_min(&losses);
    let grads = tape.backward(loss_nodes[chosen.chosen_iteration], num_params);
    Ok((chosen, grads))
}

// ---------------------------------------------------------------------------
// SGD training loop
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub patterns_per_epsilon: usize,
    pub epsilon_set: Vec<f64>,
    pub batch_count: usize,
    pub learning_rate_start: f64,
    pub learning_rate_end: f64,
    pub gradient_clip: f64,
    pub rng_seed: u64,
}

impl TrainConfig {
    /// Defaults for training on the original (full-rank) check matrix.
    pub fn nbp4(seed: u64) -> TrainConfig {
        TrainConfig {
            batch_size: 120,
            patterns_per_epsilon: 20,
            epsilon_set: vec![0.02, 0.03, 0.04, 0.05, 0.06, 0.07],
            batch_count: 2000,
            learning_rate_start: 1.0,
            learning_rate_end: 0.1,
            gradient_clip: 1e-3,
            rng_seed: seed,
        }
    }

    /// Defaults for training on an overcomplete check matrix.
    pub fn nobp4(seed: u64) -> TrainConfig {
        TrainConfig {
            epsilon_set: vec![0.06, 0.07, 0.08, 0.09, 0.10, 0.11],
            batch_count: 200,
            ..TrainConfig::nbp4(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size != self.patterns_per_epsilon * self.epsilon_set.len() {
            return Err(Error::InvalidArgument(format!(
                "batch_size {} must equal patterns_per_epsilon {} x |epsilon_set| {}",
                self.batch_size,
                self.patterns_per_epsilon,
                self.epsilon_set.len()
            )));
        }
        if self.epsilon_set.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
            return Err(Error::InvalidArgument("epsilon values must lie in [0,1]".into()));
        }
        if self.gradient_clip <= 0.0 {
            return Err(Error::InvalidArgument("gradient_clip must be positive".into()));
        }
        Ok(())
    }
}

/// Linear learning-rate schedule with exact endpoints.
pub fn learning_rate(config: &TrainConfig, batch: usize) -> f64 {
    if config.batch_count <= 1 {
        return config.learning_rate_start;
    }
    let frac = batch as f64 / (config.batch_count - 1) as f64;
    config.learning_rate_start - (config.learning_rate_start - config.learning_rate_end) * frac
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub weights: WeightSet,
    /// Mean per-sample loss of every batch, in order.
    pub batch_losses: Vec<f64>,
}

/// Plain SGD over mini-batches of depolarizing-channel samples. Gradients
/// are clipped componentwise per sample, then averaged; samples within a
/// batch run in parallel with a deterministic ordered reduction.
pub fn train(
    decoder: &Bp4Decoder,
    sperp: &NormalizerMatrix,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    let n = decoder.graph().n;
    let mut weights = decoder.initial_weights();
    let mut flat = weights.flatten();
    let mut batch_losses = Vec::with_capacity(config.batch_count);

    let channels: Vec<DepolarizingChannel> = config
        .epsilon_set
        .iter()
        .map(|&eps| DepolarizingChannel::new(eps))
        .collect::<Result<_>>()?;

    for b in 0..config.batch_count {
        let mut rng = trial_rng(config.rng_seed, b as u64);
        let mut samples = Vec::with_capacity(config.batch_size);
        for ch in &channels {
            for _ in 0..config.patterns_per_epsilon {
                samples.push(ch.sample_error(n, &mut rng));
            }
        }

        let results: Vec<Result<(LossValue, Vec<f64>)>> = samples
            .par_iter()
            .map(|e| loss_gradient(decoder, sperp, e, &weights))
            .collect();

        let mut grad = vec![0.0f64; flat.len()];
        let mut loss_sum = 0.0;
        for r in results {
            let (loss, g) = r?;
            loss_sum += loss.value;
            for (acc, &gi) in grad.iter_mut().zip(g.iter()) {
                *acc += gi.clamp(-config.gradient_clip, config.gradient_clip);
            }
        }
        let lr = learning_rate(config, b);
        let scale = lr / config.batch_size as f64;
        for (w, g) in flat.iter_mut().zip(grad.iter()) {
            *w -= scale * g;
        }
        batch_losses.push(loss_sum / config.batch_size as f64);
        weights.assign_from_flat(&flat);
    }
    Ok(TrainReport {
        weights,
        batch_losses,
    })
}
