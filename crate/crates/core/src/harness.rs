//! Monte-Carlo FER estimation, ε₀/w_r parameter searches, degeneracy
//! profiling, and experiment-file execution with CSV output.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Gf4Vector;
use crate::channel::{classify, sample_fixed_weight_error, trial_rng, DepolarizingChannel, Outcome};
use crate::codes::{CodeConfig, StabilizerCode};
use crate::decoder::{Bp4Decoder, DecoderConfig, WeightFile, WeightSet};
use crate::error::{Error, Result};
use crate::overcomplete::OvercompleteCheckSet;

/// When to stop collecting Monte-Carlo trials.
#[derive(Clone, Copy, Debug)]
pub struct StopRule {
    pub target_frame_errors: u64,
    pub max_trials: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            target_frame_errors: 300,
            max_trials: 10_000_000,
        }
    }
}

/// One Monte-Carlo data point.
#[derive(Clone, Copy, Debug)]
pub struct FerPoint {
    pub epsilon: f64,
    pub trials: u64,
    pub frame_errors: u64,
    pub fer: f64,
    /// Mean decoding iterations over successful frames (L̃).
    pub avg_iterations: f64,
    /// Tallies indexed by `Outcome::index()`.
    pub outcome_counts: [u64; 4],
    pub censored: bool,
    pub wall_time: f64,
}

impl FerPoint {
    /// 95% Wilson score interval for the FER.
    pub fn wilson_ci95(&self) -> (f64, f64) {
        wilson_ci95(self.frame_errors, self.trials)
    }
}

pub fn wilson_ci95(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Default)]
struct Tally {
    outcome_counts: [u64; 4],
    success_iterations: u64,
}

impl Tally {
    fn absorb(&mut self, outcome: Outcome, iterations: usize) {
        self.outcome_counts[outcome.index()] += 1;
        if outcome.is_success() {
            self.success_iterations += iterations as u64;
        }
    }

    fn frame_errors(&self) -> u64 {
        self.outcome_counts[2] + self.outcome_counts[3]
    }

    fn successes(&self) -> u64 {
        self.outcome_counts[0] + self.outcome_counts[1]
    }
}

fn run_trial(
    decoder: &Bp4Decoder,
    code: &StabilizerCode,
    weights: Option<&WeightSet>,
    channel: &DepolarizingChannel,
    seed: u64,
    trial: u64,
) -> Result<(Outcome, usize)> {
    let mut rng = trial_rng(seed, trial);
    let e = channel.sample_error(code.n, &mut rng);
    let z = decoder.graph().syndrome(&e)?;
    let rec = decoder.decode(&z, weights)?;
    let outcome = classify(&e, &rec.e_hat, &code.s, &code.sperp)?;
    Ok((outcome, rec.iterations_used))
}

/// Estimate the frame error rate at one physical error probability. Trials
/// run in deterministic waves: trial t always uses RNG substream t, and the
/// stop rule is evaluated at wave boundaries, so the tallies depend only on
/// (config, seed), never on scheduling.
pub fn estimate_fer(
    decoder: &Bp4Decoder,
    code: &StabilizerCode,
    weights: Option<&WeightSet>,
    epsilon: f64,
    stop: &StopRule,
    seed: u64,
) -> Result<FerPoint> {
    let channel = DepolarizingChannel::new(epsilon)?;
    let start = Instant::now();
    let wave = 1024u64;
    let mut tally = Tally::default();
    let mut trials = 0u64;
    while trials < stop.max_trials && tally.frame_errors() < stop.target_frame_errors {
        let this_wave = wave.min(stop.max_trials - trials);
        let results: Vec<Result<(Outcome, usize)>> = (trials..trials + this_wave)
            .into_par_iter()
            .map(|t| run_trial(decoder, code, weights, &channel, seed, t))
            .collect();
        for r in results {
            let (outcome, iters) = r?;
            tally.absorb(outcome, iters);
        }
        trials += this_wave;
    }
    let frame_errors = tally.frame_errors();
    Ok(FerPoint {
        epsilon,
        trials,
        frame_errors,
        fer: if trials > 0 {
            frame_errors as f64 / trials as f64
        } else {
            0.0
        },
        avg_iterations: if tally.successes() > 0 {
            tally.success_iterations as f64 / tally.successes() as f64
        } else {
            0.0
        },
        outcome_counts: tally.outcome_counts,
        censored: frame_errors < stop.target_frame_errors,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Evaluate a decoder on a fixed, pre-sampled error set (exact reuse of
/// errors across decoder variants).
pub fn evaluate_error_set(
    decoder: &Bp4Decoder,
    code: &StabilizerCode,
    weights: Option<&WeightSet>,
    errors: &[Gf4Vector],
    epsilon_label: f64,
) -> Result<FerPoint> {
    let start = Instant::now();
    let results: Vec<Result<(Outcome, usize)>> = errors
        .par_iter()
        .map(|e| {
            let z = decoder.graph().syndrome(e)?;
            let rec = decoder.decode(&z, weights)?;
            let outcome = classify(e, &rec.e_hat, &code.s, &code.sperp)?;
            Ok((outcome, rec.iterations_used))
        })
        .collect();
    let mut tally = Tally::default();
    for r in results {
        let (outcome, iters) = r?;
        tally.absorb(outcome, iters);
    }
    let trials = errors.len() as u64;
    let frame_errors = tally.frame_errors();
    Ok(FerPoint {
        epsilon: epsilon_label,
        trials,
        frame_errors,
        fer: if trials > 0 {
            frame_errors as f64 / trials as f64
        } else {
            0.0
        },
        avg_iterations: if tally.successes() > 0 {
            tally.success_iterations as f64 / tally.successes() as f64
        } else {
            0.0
        },
        outcome_counts: tally.outcome_counts,
        censored: false,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Reproducibly sample a fixed error set (substream t yields error t).
pub fn sample_error_set(n: usize, epsilon: f64, count: usize, seed: u64) -> Result<Vec<Gf4Vector>> {
    let channel = DepolarizingChannel::new(epsilon)?;
    Ok((0..count as u64)
        .map(|t| channel.sample_error(n, &mut trial_rng(seed, t)))
        .collect())
}

/// The check matrix a decoder runs on: the code's own checks or an
/// overcomplete set.
pub enum MatrixChoice<'a> {
    Plain,
    Overcomplete(&'a OvercompleteCheckSet),
}

impl MatrixChoice<'_> {
    pub fn build_decoder(&self, code: &StabilizerCode, config: DecoderConfig) -> Result<Bp4Decoder> {
        match self {
            MatrixChoice::Plain => Bp4Decoder::new(&code.s, config),
            MatrixChoice::Overcomplete(oc) => Bp4Decoder::for_overcomplete(oc, config),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MatrixChoice::Plain => "plain",
            MatrixChoice::Overcomplete(_) => "overcomplete",
        }
    }
}

/// One evaluated grid point of a parameter search.
#[derive(Clone, Copy, Debug)]
pub struct SearchEntry {
    pub eps0: f64,
    pub wr: f64,
    pub point: FerPoint,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub entries: Vec<SearchEntry>,
    /// Index into `entries` of the selected parameters.
    pub selected: usize,
    pub note: String,
}

impl SearchResult {
    pub fn selected_entry(&self) -> &SearchEntry {
        &self.entries[self.selected]
    }
}

fn select_entries(entries: Vec<SearchEntry>, note_prefix: &str) -> SearchResult {
    let mut best = 0;
    for (k, e) in entries.iter().enumerate() {
        let b = &entries[best];
        if e.point.fer < b.point.fer
            || (e.point.fer == b.point.fer && e.point.avg_iterations < b.point.avg_iterations)
        {
            best = k;
        }
    }
    let note = format!(
        "{note_prefix}: selected eps0={} wr={} with fer={:.3e} (L~ {:.2}); minimal fer, ties toward fewer iterations",
        entries[best].eps0, entries[best].wr, entries[best].point.fer, entries[best].point.avg_iterations
    );
    SearchResult {
        entries,
        selected: best,
        note,
    }
}

/// Line search over candidate ε₀ values at one evaluation ε.
#[allow(clippy::too_many_arguments)]
pub fn line_search_eps0(
    choice: &MatrixChoice,
    code: &StabilizerCode,
    template: DecoderConfig,
    candidates: &[f64],
    epsilon_eval: f64,
    stop: &StopRule,
    seed: u64,
) -> Result<SearchResult> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("empty eps0 candidate list".into()));
    }
    let mut entries = Vec::with_capacity(candidates.len());
    for &eps0 in candidates {
        let config = DecoderConfig { epsilon0: eps0, ..template };
        let decoder = choice.build_decoder(code, config)?;
        let point = estimate_fer(&decoder, code, None, epsilon_eval, stop, seed)?;
        entries.push(SearchEntry {
            eps0,
            wr: config.wr,
            point,
        });
    }
    Ok(select_entries(entries, "line search"))
}

/// Joint (ε₀, w_r) grid search for overcomplete decoding.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    oc: &OvercompleteCheckSet,
    code: &StabilizerCode,
    template: DecoderConfig,
    eps0_grid: &[f64],
    wr_grid: &[f64],
    epsilon_eval: f64,
    stop: &StopRule,
    seed: u64,
) -> Result<SearchResult> {
    if eps0_grid.is_empty() || wr_grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mut entries = Vec::with_capacity(eps0_grid.len() * wr_grid.len());
    for &eps0 in eps0_grid {
        for &wr in wr_grid {
            let config = DecoderConfig {
                epsilon0: eps0,
                wr,
                ..template
            };
            let decoder = Bp4Decoder::for_overcomplete(oc, config)?;
            let point = estimate_fer(&decoder, code, None, epsilon_eval, stop, seed)?;
            entries.push(SearchEntry { eps0, wr, point });
        }
    }
    Ok(select_entries(entries, "grid search"))
}

/// TypeII-success share per fixed error weight.
#[derive(Clone, Copy, Debug)]
pub struct DegeneracyPoint {
    pub weight: usize,
    pub samples: u64,
    pub outcome_counts: [u64; 4],
    /// TypeII successes / all successes (0 if no successes).
    pub type2_fraction: f64,
}

pub fn degeneracy_profile(
    decoder: &Bp4Decoder,
    code: &StabilizerCode,
    weights: Option<&WeightSet>,
    weight_range: std::ops::RangeInclusive<usize>,
    samples_per_weight: u64,
    seed: u64,
) -> Result<Vec<DegeneracyPoint>> {
    if *weight_range.end() > code.n {
        return Err(Error::InvalidArgument(format!(
            "error weight {} exceeds n={}",
            weight_range.end(),
            code.n
        )));
    }
    let mut points = Vec::new();
    for w in weight_range {
        let results: Vec<Result<(Outcome, usize)>> = (0..samples_per_weight)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, (w as u64) * samples_per_weight + t);
                let e = sample_fixed_weight_error(code.n, w, &mut rng);
                let z = decoder.graph().syndrome(&e)?;
                let rec = decoder.decode(&z, weights)?;
                let outcome = classify(&e, &rec.e_hat, &code.s, &code.sperp)?;
                Ok((outcome, rec.iterations_used))
            })
            .collect();
        let mut tally = Tally::default();
        for r in results {
            let (outcome, iters) = r?;
            tally.absorb(outcome, iters);
        }
        let succ = tally.successes();
        points.push(DegeneracyPoint {
            weight: w,
            samples: samples_per_weight,
            outcome_counts: tally.outcome_counts,
            type2_fraction: if succ > 0 {
                tally.outcome_counts[1] as f64 / succ as f64
            } else {
                0.0
            },
        });
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// Experiment files and CSV output
// ---------------------------------------------------------------------------

pub const CSV_HEADER: &str = "code,matrix_kind,decoder,L,eps0,wr,epsilon,trials,frame_errors,fer,fer_ci95_lo,fer_ci95_hi,type1_succ,type2_succ,flagged,unflagged,avg_iters,censored,seed";

/// Format one CSV row; wall time is deliberately excluded so that output is
/// reproducible byte-for-byte.
#[allow(clippy::too_many_arguments)]
pub fn csv_row(
    code_name: &str,
    matrix_kind: &str,
    decoder_name: &str,
    iterations: usize,
    eps0: f64,
    wr: f64,
    point: &FerPoint,
    seed: u64,
) -> String {
    let (lo, hi) = point.wilson_ci95();
    format!(
        "{code_name},{matrix_kind},{decoder_name},{iterations},{eps0},{wr},{},{},{},{},{lo},{hi},{},{},{},{},{},{},{seed}",
        point.epsilon,
        point.trials,
        point.frame_errors,
        point.fer,
        point.outcome_counts[0],
        point.outcome_counts[1],
        point.outcome_counts[2],
        point.outcome_counts[3],
        point.avg_iterations,
        point.censored,
    )
}

/// One decoder/code/matrix series of an experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub name: String,
    /// Path to a code config JSON, relative to the experiment file.
    pub code: String,
    /// Optional path to an overcomplete check-set text file.
    #[serde(default)]
    pub overcomplete: Option<String>,
    /// Optional path to a trained weight file (JSON).
    #[serde(default)]
    pub weights: Option<String>,
    pub eps0: f64,
    #[serde(default = "default_wr")]
    pub wr: f64,
    #[serde(rename = "L")]
    pub iterations: usize,
}

fn default_wr() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub epsilons: Vec<f64>,
    #[serde(default = "default_target_errors")]
    pub target_frame_errors: u64,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    pub seed: u64,
    pub series: Vec<SeriesConfig>,
    /// Emit a matplotlib script next to the CSV.
    #[serde(default)]
    pub plot_script: bool,
}

fn default_target_errors() -> u64 {
    300
}

fn default_max_trials() -> u64 {
    10_000_000
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Run every series of an experiment over its ε sweep and write one CSV row
/// per point. Returns the CSV text that was written.
pub fn run_experiment(
    config: &ExperimentConfig,
    base_dir: &Path,
    out_csv: &Path,
) -> Result<String> {
    let stop = StopRule {
        target_frame_errors: config.target_frame_errors,
        max_trials: config.max_trials,
    };
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for series in &config.series {
        let (code, _) = CodeConfig::load(&base_dir.join(&series.code))?.build()?;
        let oc = match &series.overcomplete {
            Some(p) => Some(OvercompleteCheckSet::from_text(&std::fs::read_to_string(
                base_dir.join(p),
            )?)?),
            None => None,
        };
        let choice = match &oc {
            Some(oc) => MatrixChoice::Overcomplete(oc),
            None => MatrixChoice::Plain,
        };
        let decoder_config = DecoderConfig {
            epsilon0: series.eps0,
            max_iterations: series.iterations,
            wr: series.wr,
            ..DecoderConfig::default()
        };
        let decoder = choice.build_decoder(&code, decoder_config)?;
        let weights = match &series.weights {
            Some(p) => Some(
                WeightFile::from_json(&std::fs::read_to_string(base_dir.join(p))?)?
                    .to_weight_set(),
            ),
            None => None,
        };
        for &eps in &config.epsilons {
            let point = estimate_fer(&decoder, &code, weights.as_ref(), eps, &stop, config.seed)?;
            csv.push_str(&csv_row(
                &series.code,
                choice.kind(),
                &series.name,
                series.iterations,
                series.eps0,
                series.wr,
                &point,
                config.seed,
            ));
            csv.push('\n');
        }
    }
    let mut f = std::fs::File::create(out_csv)?;
    f.write_all(csv.as_bytes())?;
    if config.plot_script {
        let script = plot_script(out_csv);
        let path = out_csv.with_extension("py");
        std::fs::write(path, script)?;
    }
    Ok(csv)
}

/// A standalone matplotlib script plotting FER vs ε (log-log) per series.
pub fn plot_script(csv_path: &Path) -> String {
    let name = csv_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results.csv".into());
    format!(
        r#"#!/usr/bin/env python3
"""Plot FER vs depolarizing probability from {name} (log-log)."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

series = defaultdict(list)
with open("{name}") as f:
    for row in csv.DictReader(f):
        key = (row["decoder"], row["matrix_kind"], row["eps0"], row["wr"])
        series[key].append((float(row["epsilon"]), float(row["fer"]),
                            float(row["fer_ci95_lo"]), float(row["fer_ci95_hi"])))

fig, ax = plt.subplots()
for key, pts in sorted(series.items()):
    pts.sort()
    eps = [p[0] for p in pts]
    fer = [p[1] for p in pts]
    lo = [p[1] - p[2] for p in pts]
    hi = [p[3] - p[1] for p in pts]
    label = "%s %s eps0=%s wr=%s" % key
    ax.errorbar(eps, fer, yerr=[lo, hi], marker="o", capsize=2, label=label)
ax.set_xscale("log")
ax.set_yscale("log")
ax.set_xlabel("depolarizing probability")
ax.set_ylabel("frame error rate")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig("{name}.png", dpi=160)
"#
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Gf4;
    use crate::codes::{build_bch713, build_toric};
    use crate::decoder::DecoderConfig;

    fn config(eps0: f64, l: usize) -> DecoderConfig {
        DecoderConfig {
            epsilon0: eps0,
            max_iterations: l,
            ..DecoderConfig::default()
        }
    }

    #[test]
    fn zero_epsilon_all_type1_first_iteration() {
        let code = build_bch713();
        let dec = Bp4Decoder::new(&code.s, config(0.1, 8)).unwrap();
        let stop = StopRule {
            target_frame_errors: 10,
            max_trials: 500,
        };
        let p = estimate_fer(&dec, &code, None, 0.0, &stop, 1).unwrap();
        assert_eq!(p.fer, 0.0);
        assert_eq!(p.outcome_counts, [p.trials, 0, 0, 0]);
        assert_eq!(p.avg_iterations, 1.0);
        assert!(p.censored);
    }

    #[test]
    fn tallies_conserve_trials() {
        let (code, _) = build_toric(3).unwrap();
        let dec = Bp4Decoder::new(&code.s, config(0.1, 6)).unwrap();
        let stop = StopRule {
            target_frame_errors: 20,
            max_trials: 3000,
        };
        let p = estimate_fer(&dec, &code, None, 0.06, &stop, 3).unwrap();
        assert_eq!(p.outcome_counts.iter().sum::<u64>(), p.trials);
        assert_eq!(p.frame_errors, p.outcome_counts[2] + p.outcome_counts[3]);
        assert!((p.fer - p.frame_errors as f64 / p.trials as f64).abs() < 1e-15);
    }

    #[test]
    fn determinism_of_tallies() {
        let (code, _) = build_toric(3).unwrap();
        let dec = Bp4Decoder::new(&code.s, config(0.1, 6)).unwrap();
        let stop = StopRule {
            target_frame_errors: 15,
            max_trials: 2048,
        };
        let a = estimate_fer(&dec, &code, None, 0.08, &stop, 42).unwrap();
        let b = estimate_fer(&dec, &code, None, 0.08, &stop, 42).unwrap();
        assert_eq!(a.outcome_counts, b.outcome_counts);
        assert_eq!(a.trials, b.trials);
        let c = estimate_fer(&dec, &code, None, 0.08, &stop, 43).unwrap();
        assert!(c.outcome_counts != a.outcome_counts || c.trials == a.trials);
    }

    #[test]
    fn bch_single_qubit_y_errors() {
        // All seven single-Y patterns through the plain decoder: exactly the
        // Y7 frame is an unflagged failure.
        let code = build_bch713();
        let dec = Bp4Decoder::new(&code.s, config(0.1, 8)).unwrap();
        let mut unflagged = Vec::new();
        for i in 0..7 {
            let mut e = Gf4Vector::zero(7);
            e.set(i, Gf4::ONE);
            let z = dec.graph().syndrome(&e).unwrap();
            let rec = dec.decode(&z, None).unwrap();
            let out = classify(&e, &rec.e_hat, &code.s, &code.sperp).unwrap();
            if out == Outcome::UnflaggedFailure {
                unflagged.push(i);
            }
        }
        assert_eq!(unflagged, vec![6]);
    }

    #[test]
    fn wilson_interval_sanity() {
        let (lo, hi) = wilson_ci95(0, 0);
        assert_eq!((lo, hi), (0.0, 1.0));
        let (lo, hi) = wilson_ci95(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        assert!(hi - lo < 0.25);
        let (lo, hi) = wilson_ci95(0, 1000);
        assert!(lo < 1e-12);
        assert!(hi < 0.01);
    }

    #[test]
    fn fer_monotone_in_iterations_on_fixed_set() {
        let (code, _) = build_toric(3).unwrap();
        let errors = sample_error_set(code.n, 0.06, 400, 7).unwrap();
        let mut last = f64::INFINITY;
        for l in [1usize, 4, 16] {
            let dec = Bp4Decoder::new(&code.s, config(0.1, l)).unwrap();
            let p = evaluate_error_set(&dec, &code, None, &errors, 0.06).unwrap();
            assert!(
                p.fer <= last + 1e-12,
                "fer {} at L={l} exceeds previous {last}",
                p.fer
            );
            last = p.fer;
        }
    }

    #[test]
    fn line_search_single_candidate_trivial() {
        let code = build_bch713();
        let stop = StopRule {
            target_frame_errors: 5,
            max_trials: 512,
        };
        let r = line_search_eps0(
            &MatrixChoice::Plain,
            &code,
            config(0.1, 8),
            &[0.1],
            0.02,
            &stop,
            1,
        )
        .unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.selected_entry().eps0, 0.1);
    }

    #[test]
    fn grid_with_unit_wr_matches_line_search() {
        let code = build_bch713();
        let oc = crate::overcomplete::combinations_all(&code).unwrap();
        let stop = StopRule {
            target_frame_errors: 5,
            max_trials: 512,
        };
        let g = grid_search(
            &oc,
            &code,
            config(0.1, 8),
            &[0.1, 0.3],
            &[1.0],
            0.03,
            &stop,
            2,
        )
        .unwrap();
        let l = line_search_eps0(
            &MatrixChoice::Overcomplete(&oc),
            &code,
            config(0.1, 8),
            &[0.1, 0.3],
            0.03,
            &stop,
            2,
        )
        .unwrap();
        assert_eq!(g.entries.len(), 2);
        for (a, b) in g.entries.iter().zip(l.entries.iter()) {
            assert_eq!(a.point.outcome_counts, b.point.outcome_counts);
        }
        assert_eq!(g.selected, l.selected);
    }

    #[test]
    fn degeneracy_weight_zero_all_type1() {
        let code = build_bch713();
        let dec = Bp4Decoder::new(&code.s, config(0.1, 8)).unwrap();
        let pts = degeneracy_profile(&dec, &code, None, 0..=1, 50, 3).unwrap();
        assert_eq!(pts[0].outcome_counts[0], 50);
        assert_eq!(pts[0].type2_fraction, 0.0);
        assert_eq!(pts[1].outcome_counts.iter().sum::<u64>(), 50);
    }

    #[test]
    fn experiment_round_trip_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("code.json"),
            r#"{"family": "bch713"}"#,
        )
        .unwrap();
        let cfg_text = r#"{
            "epsilons": [0.01, 0.02],
            "target_frame_errors": 5,
            "max_trials": 512,
            "seed": 9,
            "series": [
                {"name": "bp4", "code": "code.json", "eps0": 0.1, "L": 8}
            ],
            "plot_script": true
        }"#;
        let cfg = ExperimentConfig::from_json(cfg_text).unwrap();
        let out = dir.path().join("results.csv");
        let a = run_experiment(&cfg, dir.path(), &out).unwrap();
        let b = run_experiment(&cfg, dir.path(), &out).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
        assert_eq!(a.lines().count(), 3);
        assert!(dir.path().join("results.py").exists());
        // header-only on empty sweep
        let empty = ExperimentConfig {
            epsilons: vec![],
            ..cfg
        };
        let c = run_experiment(&empty, dir.path(), &out).unwrap();
        assert_eq!(c.trim(), CSV_HEADER);
    }

    #[test]
    fn malformed_experiment_reports_parse_error() {
        let err = ExperimentConfig::from_json("{ not json").unwrap_err();
        assert!(matches!(err, Error::Json(_)));
    }
}
