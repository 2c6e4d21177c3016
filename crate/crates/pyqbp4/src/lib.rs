//! Python bindings: code construction, overcomplete check sets, BP4
//! decoding, outcome classification, FER estimation and weight training.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qbp4::algebra::Gf4Vector;
use qbp4::channel::classify;
use qbp4::codes::{CodeConfig, StabilizerCode, ToricLayout};
use qbp4::decoder::{Bp4Decoder, DecoderConfig, WeightFile, WeightSet};
use qbp4::harness::{estimate_fer, StopRule};
use qbp4::overcomplete::{
    combinations_all, gb_natural, randomized_low_weight_search, toric_weight6,
    OvercompleteCheckSet,
};
use qbp4::training::{train, unrolled_loss, TrainConfig};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_error(s: &str, n: usize) -> PyResult<Gf4Vector> {
    if s.len() != n {
        return Err(PyValueError::new_err(format!(
            "error string has length {}, expected {n}",
            s.len()
        )));
    }
    let mut e = Gf4Vector::zero(n);
    for (i, c) in s.chars().enumerate() {
        let g = match c {
            'I' => qbp4::algebra::Gf4::ZERO,
            'Y' => qbp4::algebra::Gf4::ONE,
            'X' => qbp4::algebra::Gf4::OMEGA,
            'Z' => qbp4::algebra::Gf4::OMEGA_BAR,
            other => {
                return Err(PyValueError::new_err(format!(
                    "invalid Pauli character {other:?}"
                )))
            }
        };
        e.set(i, g);
    }
    Ok(e)
}

/// A stabilizer code plus an optional overcomplete check set.
#[pyclass(name = "Code")]
struct PyCode {
    code: StabilizerCode,
    layout: Option<ToricLayout>,
    oc: Option<OvercompleteCheckSet>,
}

#[pymethods]
impl PyCode {
    /// Build from a code-config JSON string (families: toric, gb, css, bch713).
    #[staticmethod]
    fn from_json(config: &str) -> PyResult<PyCode> {
        let cfg = CodeConfig::from_json(config).map_err(err)?;
        let (code, layout) = cfg.build().map_err(err)?;
        Ok(PyCode {
            code,
            layout,
            oc: None,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.code.n
    }

    #[getter]
    fn k(&self) -> usize {
        self.code.k
    }

    #[getter]
    fn m(&self) -> usize {
        self.code.m()
    }

    #[getter]
    fn num_overcomplete_checks(&self) -> Option<usize> {
        self.oc.as_ref().map(|oc| oc.num_rows())
    }

    /// Check matrix in text form (the plain one, or the overcomplete one if set).
    fn check_matrix_text(&self) -> String {
        match &self.oc {
            Some(oc) => oc.hoc.to_text(),
            None => self.code.s.to_text(),
        }
    }

    /// Attach an overcomplete check set: "toric6", "combinations",
    /// "gb-natural", or "search".
    #[pyo3(signature = (kind, max_weight=8, trials=1000, seed=0))]
    fn set_overcomplete(
        &mut self,
        kind: &str,
        max_weight: usize,
        trials: usize,
        seed: u64,
    ) -> PyResult<()> {
        let oc = match kind {
            "toric6" => {
                let layout = self
                    .layout
                    .as_ref()
                    .ok_or_else(|| PyValueError::new_err("toric6 requires a toric code"))?;
                toric_weight6(&self.code, layout).map_err(err)?
            }
            "combinations" => combinations_all(&self.code).map_err(err)?,
            "gb-natural" => gb_natural(&self.code).map_err(err)?,
            "search" => {
                randomized_low_weight_search(&self.code, max_weight, trials, seed).map_err(err)?
            }
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown overcomplete kind {other:?}"
                )))
            }
        };
        self.oc = Some(oc);
        Ok(())
    }

    fn clear_overcomplete(&mut self) {
        self.oc = None;
    }

    /// Syndrome of a Pauli string under the active check matrix.
    fn syndrome(&self, error: &str) -> PyResult<Vec<u32>> {
        let e = parse_error(error, self.code.n)?;
        let result = match &self.oc {
            Some(oc) => {
                let mut z = Vec::with_capacity(oc.num_rows());
                for j in 0..oc.num_rows() {
                    let mut acc = 0u8;
                    for &(i, c) in oc.hoc.row(j) {
                        acc ^= qbp4::algebra::trace_inner(e.get(i), c);
                    }
                    z.push(acc);
                }
                z
            }
            None => qbp4::channel::extract_syndrome(&self.code.s, &e).map_err(err)?,
        };
        Ok(result.into_iter().map(u32::from).collect())
    }

    /// Outcome of correcting `error` with `estimate`: "type1_success",
    /// "type2_success", "flagged_failure", or "unflagged_failure".
    fn classify(&self, error: &str, estimate: &str) -> PyResult<&'static str> {
        let e = parse_error(error, self.code.n)?;
        let ehat = parse_error(estimate, self.code.n)?;
        let outcome = classify(&e, &ehat, &self.code.s, &self.code.sperp).map_err(err)?;
        Ok(match outcome {
            qbp4::channel::Outcome::TypeISuccess => "type1_success",
            qbp4::channel::Outcome::TypeIISuccess => "type2_success",
            qbp4::channel::Outcome::FlaggedFailure => "flagged_failure",
            qbp4::channel::Outcome::UnflaggedFailure => "unflagged_failure",
        })
    }
}

/// A BP4 decoder bound to a code's active check matrix.
#[pyclass(name = "Decoder")]
struct PyDecoder {
    decoder: Bp4Decoder,
    code: StabilizerCode,
    weights: Option<WeightSet>,
}

#[pymethods]
impl PyDecoder {
    #[new]
    #[pyo3(signature = (code, eps0=0.1, iterations=32, wr=1.0))]
    fn new(code: &PyCode, eps0: f64, iterations: usize, wr: f64) -> PyResult<PyDecoder> {
        let config = DecoderConfig {
            epsilon0: eps0,
            max_iterations: iterations,
            wr,
            ..DecoderConfig::default()
        };
        let decoder = match &code.oc {
            Some(oc) => Bp4Decoder::for_overcomplete(oc, config).map_err(err)?,
            None => Bp4Decoder::new(&code.code.s, config).map_err(err)?,
        };
        Ok(PyDecoder {
            decoder,
            code: code.code.clone(),
            weights: None,
        })
    }

    /// Decode a syndrome (list of 0/1); returns (estimate, matched, iterations_used).
    fn decode(&self, syndrome: Vec<u32>) -> PyResult<(String, bool, usize)> {
        let z: Vec<u8> = syndrome
            .into_iter()
            .map(|b| {
                if b > 1 {
                    Err(PyValueError::new_err("syndrome bits must be 0 or 1"))
                } else {
                    Ok(b as u8)
                }
            })
            .collect::<PyResult<_>>()?;
        let rec = self
            .decoder
            .decode(&z, self.weights.as_ref())
            .map_err(err)?;
        Ok((rec.e_hat.to_string(), rec.matched, rec.iterations_used))
    }

    /// Load trained weights from a weight-file JSON string.
    fn load_weights(&mut self, json: &str) -> PyResult<()> {
        let wf = WeightFile::from_json(json).map_err(err)?;
        self.weights = Some(wf.to_weight_set());
        Ok(())
    }

    /// Train weights with SGD; returns the per-batch mean losses.
    #[pyo3(signature = (batch_count=200, overcomplete=false, seed=0))]
    fn train(&mut self, batch_count: usize, overcomplete: bool, seed: u64) -> PyResult<Vec<f64>> {
        let mut tc = if overcomplete {
            TrainConfig::nobp4(seed)
        } else {
            TrainConfig::nbp4(seed)
        };
        tc.batch_count = batch_count;
        let report = train(&self.decoder, &self.code.sperp, &tc).map_err(err)?;
        self.weights = Some(report.weights);
        Ok(report.batch_losses)
    }

    /// Degeneracy-aware loss of one error pattern through the unrolled decoder.
    fn loss(&self, error: &str) -> PyResult<(f64, usize)> {
        let e = parse_error(error, self.code.n)?;
        let w = match &self.weights {
            Some(w) => w.clone(),
            None => self.decoder.initial_weights(),
        };
        let l = unrolled_loss(&self.decoder, &self.code.sperp, &e, &w).map_err(err)?;
        Ok((l.value, l.chosen_iteration))
    }

    /// Monte-Carlo FER estimate; returns a dict of tallies.
    #[pyo3(signature = (epsilon, target_errors=300, max_trials=10_000_000, seed=0))]
    fn estimate_fer(
        &self,
        py: Python<'_>,
        epsilon: f64,
        target_errors: u64,
        max_trials: u64,
        seed: u64,
    ) -> PyResult<Py<pyo3::types::PyDict>> {
        let stop = StopRule {
            target_frame_errors: target_errors,
            max_trials,
        };
        let p = estimate_fer(
            &self.decoder,
            &self.code,
            self.weights.as_ref(),
            epsilon,
            &stop,
            seed,
        )
        .map_err(err)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("epsilon", p.epsilon)?;
        d.set_item("trials", p.trials)?;
        d.set_item("frame_errors", p.frame_errors)?;
        d.set_item("fer", p.fer)?;
        d.set_item("avg_iterations", p.avg_iterations)?;
        d.set_item("type1_succ", p.outcome_counts[0])?;
        d.set_item("type2_succ", p.outcome_counts[1])?;
        d.set_item("flagged", p.outcome_counts[2])?;
        d.set_item("unflagged", p.outcome_counts[3])?;
        d.set_item("censored", p.censored)?;
        Ok(d.unbind())
    }
}

#[pymodule]
fn pyqbp4(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCode>()?;
    m.add_class::<PyDecoder>()?;
    Ok(())
}
