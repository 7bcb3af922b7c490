use serde::Serialize;

use super::config::{Estimator, ExperimentConfig};
use super::pipeline::Pipeline;
use super::spectrogram::{
    artifact_energy_db, profile_ridge, profile_support, ridge_stats, simulate_frames,
    spectrogram_from_frames, RidgeStats, Spectrogram,
};
use crate::error::Result;

/// Support margin, in grid bins, for the artifact-energy measure.
pub const SUPPORT_MARGIN_BINS: f64 = 1.0;

#[derive(Debug, Clone, Serialize)]
pub struct EstimatorSummary {
    pub estimator: Estimator,
    /// Set for the reference runs made without the clutter filter.
    pub filtered: bool,
    pub ridge: RidgeStats,
    /// Spectrogram power outside the blood support, relative to the total.
    pub artifact_energy_db: f64,
    #[serde(skip)]
    pub spectrogram: Spectrogram,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub pattern: serde_json::Value,
    pub frames: usize,
    pub noise_power: f64,
    pub summaries: Vec<EstimatorSummary>,
}

impl CompareReport {
    pub fn summary(&self, est: Estimator, filtered: bool) -> Option<&EstimatorSummary> {
        self.summaries
            .iter()
            .find(|s| s.estimator == est && s.filtered == filtered)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "estimator,filtered,ridge_within_one_bin,mean_ridge_error_bins,max_ridge_error_bins,artifact_energy_db\n",
        );
        for s in &self.summaries {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{},{:.6}\n",
                s.estimator,
                s.filtered,
                s.ridge.within_one_bin,
                s.ridge.mean_abs_bin_error,
                s.ridge.max_abs_bin_error,
                s.artifact_energy_db
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Every configured estimator on one simulated dataset. The periodogram
/// always zero-fills sparse data here. When a clutter filter is configured
/// the coarray estimators are also run without it, for reference.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<CompareReport> {
    let mut cfg = cfg.clone();
    cfg.welch.zero_fill = true;
    let pipe = Pipeline::new(&cfg)?;
    let data = simulate_frames(&cfg, pipe.pattern())?;
    let truth = profile_ridge(&data.profile);
    let support = profile_support(&data.profile);

    let mut runs = vec![(pipe.clone(), true)];
    if cfg.filter.is_some() {
        let mut plain = cfg.clone();
        plain.filter = None;
        runs.push((
            Pipeline::with_pattern(&plain, pipe.pattern().clone())?,
            false,
        ));
    }
    let mut summaries = Vec::new();
    for (p, filtered) in &runs {
        for &est in &cfg.estimators {
            if !filtered && est == Estimator::Welch {
                continue;
            }
            let spectrogram = spectrogram_from_frames(p, &data, est)?;
            summaries.push(EstimatorSummary {
                estimator: est,
                filtered: *filtered,
                ridge: ridge_stats(&spectrogram, &truth)?,
                artifact_energy_db: artifact_energy_db(
                    &spectrogram,
                    &support,
                    SUPPORT_MARGIN_BINS,
                )?,
                spectrogram,
            });
        }
    }
    Ok(CompareReport {
        pattern: pipe.pattern().to_json(),
        frames: data.profile.len(),
        noise_power: data.noise_power,
        summaries,
    })
}
