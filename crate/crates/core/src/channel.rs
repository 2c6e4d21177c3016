//! Depolarizing-channel sampling, syndrome extraction and the four-way
//! outcome classification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{vector_trace_inner, CheckMatrix, Gf4, Gf4Vector, NormalizerMatrix};
use crate::error::{Error, Result};

/// Depolarizing channel: each qubit independently suffers X, Z or Y, each
/// with probability ε/3.
#[derive(Clone, Copy, Debug)]
pub struct DepolarizingChannel {
    pub epsilon: f64,
}

impl DepolarizingChannel {
    pub fn new(epsilon: f64) -> Result<DepolarizingChannel> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing probability must lie in [0,1], got {epsilon}"
            )));
        }
        Ok(DepolarizingChannel { epsilon })
    }

    /// Sample an i.i.d. error pattern of length n.
    pub fn sample_error<R: Rng>(&self, n: usize, rng: &mut R) -> Gf4Vector {
        let mut e = Gf4Vector::zero(n);
        for i in 0..n {
            let u: f64 = rng.random();
            if u < self.epsilon {
                let t = u / self.epsilon * 3.0;
                let p = if t < 1.0 {
                    Gf4::OMEGA // X
                } else if t < 2.0 {
                    Gf4::OMEGA_BAR // Z
                } else {
                    Gf4::ONE // Y
                };
                e.set(i, p);
            }
        }
        e
    }
}

/// A reproducible per-trial RNG substream: trial t of a seeded run always
/// sees the same stream regardless of scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Sample an error of exactly the given weight: support positions uniform
/// without replacement, types uniform over {X, Y, Z}.
pub fn sample_fixed_weight_error<R: Rng>(n: usize, weight: usize, rng: &mut R) -> Gf4Vector {
    assert!(weight <= n);
    let mut e = Gf4Vector::zero(n);
    let mut positions: Vec<usize> = (0..n).collect();
    for k in 0..weight {
        let pick = rng.random_range(k..n);
        positions.swap(k, pick);
        let p = [Gf4::OMEGA, Gf4::OMEGA_BAR, Gf4::ONE][rng.random_range(0..3)];
        e.set(positions[k], p);
    }
    e
}

/// Syndrome z with z_j = ⟨e, S_j⟩ for every check row j.
pub fn extract_syndrome(s: &CheckMatrix, e: &Gf4Vector) -> Result<Vec<u8>> {
    if e.len() != s.n() {
        return Err(Error::LengthMismatch {
            expected: s.n(),
            got: e.len(),
        });
    }
    Ok((0..s.m())
        .map(|j| {
            s.row(j)
                .iter()
                .fold(0u8, |acc, &(i, c)| acc ^ crate::algebra::trace_inner(e.get(i), c))
        })
        .collect())
}

/// The four possible outcomes of one decoding attempt.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Outcome {
    /// ê = e exactly.
    TypeISuccess,
    /// ê differs from e but e+ê commutes with the whole normalizer.
    TypeIISuccess,
    /// ê does not reproduce the syndrome of e.
    FlaggedFailure,
    /// Syndrome matches but e+ê anticommutes with some normalizer row.
    UnflaggedFailure,
}

impl Outcome {
    pub fn is_success(self) -> bool {
        matches!(self, Outcome::TypeISuccess | Outcome::TypeIISuccess)
    }

    pub fn index(self) -> usize {
        match self {
            Outcome::TypeISuccess => 0,
            Outcome::TypeIISuccess => 1,
            Outcome::FlaggedFailure => 2,
            Outcome::UnflaggedFailure => 3,
        }
    }
}

/// Classify a decoding attempt. The syndrome of ê is compared against the
/// syndrome of e (not a decoder flag), so the classification is
/// decoder-agnostic.
pub fn classify(
    e: &Gf4Vector,
    e_hat: &Gf4Vector,
    s: &CheckMatrix,
    sperp: &NormalizerMatrix,
) -> Result<Outcome> {
    let residual = e.add(e_hat)?;
    if residual.weight() == 0 {
        return Ok(Outcome::TypeISuccess);
    }
    let ze = extract_syndrome(s, e)?;
    let zhat = extract_syndrome(s, e_hat)?;
    if ze != zhat {
        return Ok(Outcome::FlaggedFailure);
    }
    for j in 0..sperp.num_rows() {
        if vector_trace_inner(&residual, sperp.row(j))? != 0 {
            return Ok(Outcome::UnflaggedFailure);
        }
    }
    Ok(Outcome::TypeIISuccess)
}
