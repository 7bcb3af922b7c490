//! Monte Carlo frequency-error sweep over SNR.
//!
//! Each trial draws uniformly sampled data over the full window. The
//! periodogram sees all of it; the coarray estimators see the same
//! realization restricted to the configured pattern.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Estimator, ExperimentConfig};
use super::pipeline::{noise_for, Pipeline, SpectrumEstimate};
use crate::array_design::EmissionPattern;
use crate::error::{Error, Result};
use crate::signal_model::{generate_stream, ToneSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseRow {
    pub snr_db: f64,
    pub estimator: Estimator,
    pub mse: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseTable {
    /// Frequency of the strongest tone, the estimation target.
    pub nu: f64,
    pub rows: Vec<MseRow>,
}

impl MseTable {
    pub fn get(&self, snr_db: f64, est: Estimator) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.snr_db == snr_db && r.estimator == est)
            .map(|r| r.mse)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("snr_db,estimator,mse,trials\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.12e},{}\n",
                r.snr_db, r.estimator, r.mse, r.trials
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("table serializes")
    }
}

/// Wrapped difference on the unit circle of normalized frequency.
pub fn frequency_error(estimate: f64, truth: f64) -> f64 {
    (estimate - truth + 0.5).rem_euclid(1.0) - 0.5
}

fn squared_error(est: &SpectrumEstimate, truth: f64) -> f64 {
    // No peak at all counts as the worst possible error.
    est.peak_frequency()
        .map_or(0.25, |f| frequency_error(f, truth).powi(2))
}

pub fn run_mse(cfg: &ExperimentConfig) -> Result<MseTable> {
    let mut cfg = cfg.clone();
    if cfg.tones.is_empty() {
        return Err(Error::Config("MSE sweep needs at least one tone".into()));
    }
    let blood = cfg.blood_tones()?;
    if cfg.nesprit.order.is_none() && cfg.nesprit.threshold.lambda == 0.0 {
        cfg.nesprit.order = Some(blood.len());
    }
    let truth = blood.peak().expect("non-empty").nu;
    let sparse = Pipeline::new(&cfg)?;
    let full_pattern = EmissionPattern::standard(cfg.p)?;
    let full = Pipeline::with_pattern(&cfg, full_pattern.clone())?;

    let mut rows = Vec::new();
    for (si, &snr) in cfg.snr_list.iter().enumerate() {
        let noise = noise_for(&blood, snr);
        let errors: Vec<Vec<f64>> = if cfg.analytic {
            vec![analytic_errors(&cfg, &sparse, &full, &blood, noise, truth)?]
        } else {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let stream = (si * cfg.trials + t) as u64;
                    let snap =
                        generate_stream(&blood, &full_pattern, cfg.q, noise, cfg.seed, stream)?;
                    let sub = snap.subsample(sparse.pattern())?;
                    cfg.estimators
                        .iter()
                        .map(|&est| {
                            let out = match est {
                                Estimator::Welch => full.welch(&snap)?,
                                _ => sparse.estimate_coarray(&sparse.coarray(&sub)?, est)?,
                            };
                            Ok(squared_error(&out, truth))
                        })
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<_>>()?
        };
        for (k, &est) in cfg.estimators.iter().enumerate() {
            let sum: f64 = errors.iter().map(|e| e[k]).sum();
            rows.push(MseRow {
                snr_db: snr,
                estimator: est,
                mse: sum / errors.len() as f64,
                trials: errors.len(),
            });
        }
    }
    Ok(MseTable { nu: truth, rows })
}

fn analytic_errors(
    cfg: &ExperimentConfig,
    sparse: &Pipeline,
    full: &Pipeline,
    blood: &ToneSet,
    noise: f64,
    truth: f64,
) -> Result<Vec<f64>> {
    let z = sparse.coarray_analytic(blood, noise)?;
    cfg.estimators
        .iter()
        .map(|&est| {
            let out = match est {
                Estimator::Welch => {
                    full.welch_expected(&full.raw_coarray_analytic(blood, noise)?)?
                }
                _ => sparse.estimate_coarray(&z, est)?,
            };
            Ok(squared_error(&out, truth))
        })
        .collect()
}
