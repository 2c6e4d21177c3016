//! End-to-end acceptance checks for the decoding toolkit. Each test covers
//! one numbered criterion and writes a single PASS/FAIL line directly to
//! stdout (bypassing test capture) so a full run yields a checklist.

use std::io::Write as _;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::OnceLock;

use rayon::prelude::*;

use qbp4::algebra::{trace_inner, Gf4, Gf4Vector};
use qbp4::channel::{classify, extract_syndrome, trial_rng, DepolarizingChannel, Outcome};
use qbp4::codes::{build_bch713, build_gb, build_toric, GbSpec, StabilizerCode};
use qbp4::decoder::{
    belief_quantize, boxplus, init_channel_llr, Bp4Decoder, DecoderConfig, WeightSet,
};
use qbp4::harness::{
    degeneracy_profile, estimate_fer, evaluate_error_set, grid_search, sample_error_set, StopRule,
};
use qbp4::overcomplete::{
    combinations_all, gb_natural, remap_syndrome, toric_weight6, OvercompleteCheckSet,
};
use qbp4::training::{loss_gradient, train, unrolled_loss, TrainConfig};

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

/// Run one criterion body and print its pass/fail line straight to the
/// process stdout so it shows up even under the default test harness.
fn report(criterion: usize, body: impl FnOnce() -> Result<String, String>) {
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let line = match &outcome {
        Ok(Ok(detail)) => format!("criterion {criterion}: PASS - {detail}"),
        Ok(Err(msg)) => format!("criterion {criterion}: FAIL - {msg}"),
        Err(_) => format!("criterion {criterion}: FAIL - panicked"),
    };
    writeln!(std::io::stdout().lock(), "{line}").unwrap();
    match outcome {
        Ok(Ok(_)) => {}
        Ok(Err(msg)) => panic!("criterion {criterion} failed: {msg}"),
        Err(p) => resume_unwind(p),
    }
}

fn s(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn bch_config(iterations: usize) -> DecoderConfig {
    DecoderConfig {
        epsilon0: 0.1,
        max_iterations: iterations,
        ..DecoderConfig::default()
    }
}

/// Single-qubit Y error on the last of n qubits.
fn y_last(n: usize) -> Gf4Vector {
    let mut e = Gf4Vector::zero(n);
    e.set(n - 1, Gf4::ONE);
    e
}

#[test]
fn criterion_01_bch_worked_example() {
    report(1, || {
        let code = build_bch713();
        let config = bch_config(8);
        let chan = init_channel_llr(&config).map_err(s)?;

        // Initial quantized VN messages: identical for every eta since the
        // channel LLR vector is symmetric.
        for eta in [Gf4::ONE, Gf4::OMEGA, Gf4::OMEGA_BAR] {
            let lam = belief_quantize(&chan, eta, config.message_clamp);
            ensure!(
                (lam - 2.639).abs() <= 0.005,
                "initial VN message {lam:.4} outside 2.639 +/- 0.005"
            );
        }

        // First-round CN message on any edge: every check has weight 4 and
        // every syndrome bit is 1, so all CN messages coincide.
        let lam = belief_quantize(&chan, Gf4::ONE, config.message_clamp);
        let cn = -boxplus(&[lam, lam, lam], config.message_clamp);
        ensure!(
            (cn + 1.556).abs() <= 0.005,
            "first CN message {cn:.4} outside -1.556 +/- 0.005"
        );

        let e = y_last(code.n);
        let z = extract_syndrome(&code.s, &e).map_err(s)?;
        ensure!(z.iter().all(|&b| b == 1), "syndrome of Y7 not all ones: {z:?}");

        let plain = Bp4Decoder::new(&code.s, config).map_err(s)?;
        let rec = plain.decode(&z, None).map_err(s)?;
        ensure!(
            rec.e_hat.to_string() == "IIYIYYY",
            "plain first hard decision {} != IIYIYYY",
            rec.e_hat
        );
        ensure!(rec.matched && rec.iterations_used == 1, "plain decode did not match in 1 iteration");
        let out = classify(&e, &rec.e_hat, &code.s, &code.sperp).map_err(s)?;
        ensure!(out == Outcome::UnflaggedFailure, "plain outcome {out:?} != UnflaggedFailure");

        let oc = combinations_all(&code).map_err(s)?;
        ensure!(oc.num_rows() == 14, "overcomplete rows {} != 14", oc.num_rows());
        let zoc = remap_syndrome(&oc.m_map, &z).map_err(s)?;
        let expected = vec![1u8, 1, 0, 1, 0, 0, 1, 1, 1, 0, 1, 0, 0, 1];
        ensure!(zoc == expected, "remapped syndrome {zoc:?} != {expected:?}");

        let odec = Bp4Decoder::for_overcomplete(&oc, config).map_err(s)?;
        let orec = odec.decode(&zoc, None).map_err(s)?;
        ensure!(
            orec.e_hat.to_string() == "IIIIIIY",
            "overcomplete first hard decision {} != IIIIIIY",
            orec.e_hat
        );
        ensure!(orec.matched && orec.iterations_used == 1, "overcomplete decode did not match in 1 iteration");
        let out = classify(&e, &orec.e_hat, &code.s, &code.sperp).map_err(s)?;
        ensure!(out == Outcome::TypeISuccess, "overcomplete outcome {out:?} != TypeISuccess");

        Ok("[[7,1,3]] worked example reproduced exactly".into())
    });
}

#[test]
fn criterion_02_toric_family_parameters() {
    report(2, || {
        for (d, n, m_oc) in [(4usize, 32usize, 96usize), (6, 72, 216), (8, 128, 384), (10, 200, 600)] {
            let (code, layout) = build_toric(d).map_err(s)?;
            ensure!(
                (code.n, code.k) == (n, 2),
                "toric d={d}: (n,k)=({},{}) != ({n},2)",
                code.n,
                code.k
            );
            ensure!(
                code.s.max_row_weight() == 4,
                "toric d={d}: check weight {} != 4",
                code.s.max_row_weight()
            );
            let oc = toric_weight6(&code, &layout).map_err(s)?;
            ensure!(
                oc.num_rows() == m_oc,
                "toric d={d}: overcomplete rows {} != {m_oc}",
                oc.num_rows()
            );
        }
        Ok("toric d in {4,6,8,10}: (n,k), check weight 4 and 3n overcomplete rows".into())
    });
}

/// Symplectic (trace) inner product of a sparse check row with a dense row.
fn row_commutes(sparse: &[(usize, Gf4)], dense: &Gf4Vector) -> bool {
    let mut acc = 0u8;
    for &(i, c) in sparse {
        acc ^= trace_inner(c, dense.get(i));
    }
    acc == 0
}

fn invariant_checks(
    name: &str,
    code: &StabilizerCode,
    oc: &OvercompleteCheckSet,
) -> Result<(), String> {
    ensure!(code.s.rows_commute(), "{name}: stabilizer rows do not all commute");
    let expected = 2 * code.n - code.m();
    ensure!(
        code.sperp.num_rows() == expected,
        "{name}: normalizer rows {} != 2n-m = {expected}",
        code.sperp.num_rows()
    );
    for j in 0..code.s.m() {
        for p in code.sperp.rows() {
            ensure!(
                row_commutes(code.s.row(j), p),
                "{name}: normalizer row anticommutes with check {j}"
            );
        }
    }

    let channel = DepolarizingChannel::new(0.2).map_err(s)?;
    for t in 0..1000u64 {
        let e = channel.sample_error(code.n, &mut trial_rng(0xACC3, t));
        let z = extract_syndrome(&code.s, &e).map_err(s)?;
        let remapped = remap_syndrome(&oc.m_map, &z).map_err(s)?;
        let direct: Vec<u8> = (0..oc.num_rows())
            .map(|j| {
                oc.hoc
                    .row(j)
                    .iter()
                    .fold(0u8, |acc, &(i, c)| acc ^ trace_inner(e.get(i), c))
            })
            .collect();
        ensure!(remapped == direct, "{name}: remapped syndrome mismatch at trial {t}");
    }
    Ok(())
}

#[test]
fn criterion_03_algebraic_invariants() {
    report(3, || {
        let bch = build_bch713();
        invariant_checks("bch713", &bch, &combinations_all(&bch).map_err(s)?)?;

        let (toric, layout) = build_toric(4).map_err(s)?;
        invariant_checks("toric d=4", &toric, &toric_weight6(&toric, &layout).map_err(s)?)?;

        let a3 = build_gb(&GbSpec {
            circ_size: 24,
            a_exponents: vec![0, 2, 8, 15],
            b_exponents: vec![0, 2, 12, 17],
            rows_per_block: None,
        })
        .map_err(s)?;
        invariant_checks("gb a3", &a3, &gb_natural(&a3).map_err(s)?)?;

        Ok("syndrome remap, commuting checks and 2n-m normalizer rows on 3 codes x 1000 trials".into())
    });
}

/// Deterministic off-ones perturbation so the gradient check runs at a
/// generic point of weight space.
fn perturbed_weights(decoder: &Bp4Decoder) -> WeightSet {
    let mut w = decoder.initial_weights();
    let mut flat = w.flatten();
    for (i, v) in flat.iter_mut().enumerate() {
        *v += 0.05 * (((i * 37) % 101) as f64 / 101.0 - 0.5);
    }
    w.assign_from_flat(&flat);
    w
}

fn gradient_check(
    decoder: &Bp4Decoder,
    code: &StabilizerCode,
    errors: &[Gf4Vector],
    label: &str,
) -> Result<(), String> {
    let weights = perturbed_weights(decoder);
    let flat = weights.flatten();
    errors
        .par_iter()
        .enumerate()
        .try_for_each(|(t, e)| -> Result<(), String> {
            let (_, grad) = loss_gradient(decoder, &code.sperp, e, &weights).map_err(s)?;
            let h = 1e-4;
            for p in 0..flat.len() {
                let mut probe = flat.clone();
                probe[p] = flat[p] + h;
                let mut wp = weights.clone();
                wp.assign_from_flat(&probe);
                let up = unrolled_loss(decoder, &code.sperp, e, &wp).map_err(s)?.value;
                probe[p] = flat[p] - h;
                wp.assign_from_flat(&probe);
                let down = unrolled_loss(decoder, &code.sperp, e, &wp).map_err(s)?.value;
                let fd = (up - down) / (2.0 * h);
                let tol = 1e-6 + 1e-4 * grad[p].abs().max(fd.abs());
                ensure!(
                    (grad[p] - fd).abs() <= tol,
                    "{label}: pattern {t} weight {p}: analytic {} vs fd {fd}",
                    grad[p]
                );
            }
            Ok(())
        })
}

#[test]
fn criterion_04_gradient_matches_finite_differences() {
    report(4, || {
        let code = build_bch713();
        let oc = combinations_all(&code).map_err(s)?;
        let channel = DepolarizingChannel::new(0.1).map_err(s)?;
        let errors: Vec<Gf4Vector> = (0..20u64)
            .map(|t| channel.sample_error(code.n, &mut trial_rng(0x6AD, t)))
            .collect();

        for iterations in [1usize, 2, 3] {
            let config = bch_config(iterations);
            let plain = Bp4Decoder::new(&code.s, config).map_err(s)?;
            gradient_check(&plain, &code, &errors, &format!("plain L={iterations}"))?;
            let odec = Bp4Decoder::for_overcomplete(&oc, config).map_err(s)?;
            gradient_check(&odec, &code, &errors, &format!("overcomplete L={iterations}"))?;
        }
        Ok("analytic gradients match central differences for L in {1,2,3}, both matrices".into())
    });
}

#[test]
fn criterion_05_toric_overcomplete_beats_plain() {
    report(5, || {
        let (code, layout) = build_toric(4).map_err(s)?;
        let stop = StopRule {
            target_frame_errors: 100,
            max_trials: 1_000_000,
        };

        let plain = Bp4Decoder::new(
            &code.s,
            DecoderConfig {
                epsilon0: 0.1,
                max_iterations: 32,
                ..DecoderConfig::default()
            },
        )
        .map_err(s)?;
        let bp = estimate_fer(&plain, &code, None, 0.05, &stop, 51).map_err(s)?;

        let oc = toric_weight6(&code, &layout).map_err(s)?;
        let odec = Bp4Decoder::for_overcomplete(
            &oc,
            DecoderConfig {
                epsilon0: 0.45,
                max_iterations: 32,
                ..DecoderConfig::default()
            },
        )
        .map_err(s)?;
        let obp = estimate_fer(&odec, &code, None, 0.05, &stop, 52).map_err(s)?;

        let (_, o_hi) = obp.wilson_ci95();
        let (b_lo, _) = bp.wilson_ci95();
        ensure!(
            obp.fer < bp.fer && o_hi < b_lo,
            "intervals overlap: overcomplete {} [hi {o_hi:.4}] vs plain {} [lo {b_lo:.4}]",
            obp.fer,
            bp.fer
        );
        Ok(format!(
            "toric d=4 at eps=0.05: overcomplete FER {:.4} < plain FER {:.4}, CIs disjoint",
            obp.fer, bp.fer
        ))
    });
}

#[test]
fn criterion_06_bch_overcomplete_beats_plain() {
    report(6, || {
        let code = build_bch713();
        let stop = StopRule {
            target_frame_errors: 100,
            max_trials: 10_000_000,
        };
        let config = bch_config(32);

        let plain = Bp4Decoder::new(&code.s, config).map_err(s)?;
        let bp = estimate_fer(&plain, &code, None, 0.02, &stop, 61).map_err(s)?;

        let oc = combinations_all(&code).map_err(s)?;
        let odec = Bp4Decoder::for_overcomplete(&oc, config).map_err(s)?;
        let obp = estimate_fer(&odec, &code, None, 0.02, &stop, 62).map_err(s)?;

        let (_, o_hi) = obp.wilson_ci95();
        let (b_lo, _) = bp.wilson_ci95();
        ensure!(
            obp.fer < bp.fer && o_hi < b_lo,
            "intervals overlap: overcomplete {} [hi {o_hi:.2e}] vs plain {} [lo {b_lo:.2e}]",
            obp.fer,
            bp.fer
        );
        Ok(format!(
            "[[7,1,3]] at eps=0.02: overcomplete FER {:.2e} < plain FER {:.2e}, CIs disjoint",
            obp.fer, bp.fer
        ))
    });
}

/// Training artifacts shared between criteria 7 and 8.
struct Trained {
    weights: WeightSet,
    baseline_fer: f64,
    trained_fer: f64,
    attempts: usize,
    ratio_ok: bool,
}

static TRAINED: OnceLock<Result<Trained, String>> = OnceLock::new();

fn trained_toric4() -> &'static Result<Trained, String> {
    TRAINED.get_or_init(|| {
        let (code, _) = build_toric(4).map_err(s)?;
        // eps0 = 0.45 is the tabulated initial value for the toric d=4 code;
        // it also gives the training the most room to reshape the messages.
        let decoder = Bp4Decoder::new(
            &code.s,
            DecoderConfig {
                epsilon0: 0.45,
                max_iterations: 12,
                ..DecoderConfig::default()
            },
        )
        .map_err(s)?;
        let held_out = sample_error_set(code.n, 0.04, 20_000, 0x8E7D).map_err(s)?;
        let baseline = evaluate_error_set(&decoder, &code, None, &held_out, 0.04).map_err(s)?;

        let mut best: Option<Trained> = None;
        // One retry with a fresh seed is allowed for this stochastic check.
        for (attempt, seed) in [11u64, 12u64].into_iter().enumerate() {
            let mut config = TrainConfig::nbp4(seed);
            config.batch_count = 300;
            let outcome = train(&decoder, &code.sperp, &config).map_err(s)?;
            let point =
                evaluate_error_set(&decoder, &code, Some(&outcome.weights), &held_out, 0.04)
                    .map_err(s)?;
            let candidate = Trained {
                weights: outcome.weights,
                baseline_fer: baseline.fer,
                trained_fer: point.fer,
                attempts: attempt + 1,
                ratio_ok: point.fer <= 0.7 * baseline.fer,
            };
            let better = best
                .as_ref()
                .map(|b| candidate.trained_fer < b.trained_fer)
                .unwrap_or(true);
            if better {
                best = Some(candidate);
            }
            if best.as_ref().is_some_and(|b| b.ratio_ok) {
                break;
            }
        }
        Ok(best.expect("at least one training attempt"))
    })
}

#[test]
fn criterion_07_training_reduces_fer() {
    report(7, || {
        let trained = trained_toric4().as_ref().map_err(Clone::clone)?;
        ensure!(
            trained.ratio_ok,
            "trained FER {:.4} > 0.7 x baseline FER {:.4} after {} attempt(s)",
            trained.trained_fer,
            trained.baseline_fer,
            trained.attempts
        );
        Ok(format!(
            "toric d=4 L=12: trained FER {:.4} <= 0.7 x baseline {:.4} ({} attempt(s))",
            trained.trained_fer, trained.baseline_fer, trained.attempts
        ))
    });
}

#[test]
fn criterion_08_training_raises_degenerate_successes() {
    report(8, || {
        let trained = trained_toric4().as_ref().map_err(Clone::clone)?;
        let (code, _) = build_toric(4).map_err(s)?;
        let decoder = Bp4Decoder::new(
            &code.s,
            DecoderConfig {
                epsilon0: 0.45,
                max_iterations: 12,
                ..DecoderConfig::default()
            },
        )
        .map_err(s)?;
        let base = degeneracy_profile(&decoder, &code, None, 3..=6, 1000, 0xDE6).map_err(s)?;
        let tuned = degeneracy_profile(&decoder, &code, Some(&trained.weights), 3..=6, 1000, 0xDE6)
            .map_err(s)?;
        for (b, t) in base.iter().zip(tuned.iter()) {
            ensure!(
                t.type2_fraction >= b.type2_fraction,
                "weight {}: trained TypeII fraction {:.3} < untrained {:.3}",
                b.weight,
                t.type2_fraction,
                b.type2_fraction
            );
        }
        let summary: Vec<String> = base
            .iter()
            .zip(tuned.iter())
            .map(|(b, t)| format!("w{}: {:.2}->{:.2}", b.weight, b.type2_fraction, t.type2_fraction))
            .collect();
        Ok(format!("TypeII share among successes never drops ({})", summary.join(", ")))
    });
}

#[test]
fn criterion_09_iteration_count_grows_as_wr_shrinks() {
    report(9, || {
        let (code, layout) = build_toric(6).map_err(s)?;
        let oc = toric_weight6(&code, &layout).map_err(s)?;
        let template = DecoderConfig {
            max_iterations: 32,
            ..DecoderConfig::default()
        };
        let eps0_grid = [0.25, 0.35, 0.45];
        let wr_grid = [0.05, 0.1, 0.2];
        let stop = StopRule {
            target_frame_errors: u64::MAX,
            max_trials: 4096,
        };
        let result = grid_search(&oc, &code, template, &eps0_grid, &wr_grid, 0.05, &stop, 91)
            .map_err(s)?;
        for (row, &eps0) in eps0_grid.iter().enumerate() {
            let iters: Vec<f64> = (0..wr_grid.len())
                .map(|col| result.entries[row * wr_grid.len() + col].point.avg_iterations)
                .collect();
            // wr grid is ascending, so average iterations must be descending.
            ensure!(
                iters[0] > iters[1] && iters[1] > iters[2],
                "eps0={eps0}: avg iterations {iters:?} not decreasing in wr"
            );
        }
        Ok("toric d=6 grid: average iterations rise monotonically as wr shrinks".into())
    });
}

#[test]
fn criterion_10_simulate_is_deterministic() {
    report(10, || {
        let dir = tempfile::tempdir().map_err(s)?;
        let config = dir.path().join("toric3.json");
        std::fs::write(&config, "{\"family\": \"toric\", \"d\": 3}").map_err(s)?;
        let outputs: Vec<String> = (0..2)
            .map(|run| -> Result<String, String> {
                let out = dir.path().join(format!("run{run}.csv"));
                let status = Command::new(env!("CARGO_BIN_EXE_qbp4"))
                    .args([
                        "simulate",
                        "--code",
                        config.to_str().unwrap(),
                        "--eps",
                        "0.03,0.05",
                        "--eps0",
                        "0.1",
                        "-L",
                        "8",
                        "--target-errors",
                        "20",
                        "--max-trials",
                        "4096",
                        "--seed",
                        "7",
                        "--out",
                        out.to_str().unwrap(),
                    ])
                    .status()
                    .map_err(s)?;
                ensure!(status.success(), "simulate run {run} exited with {status}");
                std::fs::read_to_string(&out).map_err(s)
            })
            .collect::<Result<_, _>>()?;
        ensure!(outputs[0] == outputs[1], "CSV outputs differ between identical runs");
        ensure!(
            outputs[0].lines().count() == 3,
            "expected header plus two rows, got:\n{}",
            outputs[0]
        );
        Ok("two identical simulate invocations produced byte-identical CSV".into())
    });
}
