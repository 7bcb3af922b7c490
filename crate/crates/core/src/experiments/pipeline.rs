use serde::Serialize;

use super::config::{Estimator, ExperimentConfig};
use crate::array_design::{difference_set, DifferenceSet, EmissionPattern};
use crate::coarray::{
    apodize, clutter_filter, estimate_covariance, lag_average, ClutterFilter, CoarraySignal,
    CovarianceEstimate,
};
use crate::error::{Error, Module, Result};
use crate::estimators::{
    expected_periodogram, nesprit_with, nest, welch_snapshots, GridSpectrum, LineSpectrum,
};
use crate::signal_model::{
    analytic_covariance, generate_snapshots, noise_power_for_snr, SlowTimeSnapshots, ToneSet,
};

/// Output of one estimator on one CPI.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumEstimate {
    Grid(GridSpectrum),
    Lines(LineSpectrum),
}

impl SpectrumEstimate {
    /// Grid view; lines are rasterized onto `len` bins.
    pub fn to_grid(&self, len: usize) -> GridSpectrum {
        match self {
            SpectrumEstimate::Grid(g) => g.clone(),
            SpectrumEstimate::Lines(l) => l.rasterize(len),
        }
    }

    /// Frequency of the strongest bin or line.
    pub fn peak_frequency(&self) -> Option<f64> {
        match self {
            SpectrumEstimate::Grid(g) => g.peak_frequency(),
            SpectrumEstimate::Lines(l) => l.strongest().map(|l| l.nu),
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            SpectrumEstimate::Grid(g) => g.to_csv(),
            SpectrumEstimate::Lines(l) => l.to_csv(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            SpectrumEstimate::Grid(g) => g.to_json(),
            SpectrumEstimate::Lines(l) => l.to_json(),
        }
    }
}

/// Noise power for the configured SNR against the blood tones only.
/// Unit noise when there is no blood signal.
pub fn noise_for(blood: &ToneSet, snr_db: f64) -> f64 {
    if blood.total_power() > 0.0 {
        noise_power_for_snr(blood, snr_db)
    } else {
        1.0
    }
}

/// Pattern, filter and window resolved from a config, applied to one CPI
/// at a time.
#[derive(Debug, Clone)]
pub struct Pipeline {
    cfg: ExperimentConfig,
    pattern: EmissionPattern,
    diffs: DifferenceSet,
    filter: Option<ClutterFilter>,
    window: Option<Vec<f64>>,
}

impl Pipeline {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let pattern = cfg.build_pattern()?;
        Self::with_pattern(cfg, pattern)
    }

    pub fn with_pattern(cfg: &ExperimentConfig, pattern: EmissionPattern) -> Result<Self> {
        let diffs = difference_set(&pattern);
        Ok(Self {
            filter: cfg.build_filter()?,
            window: cfg
                .window
                .as_ref()
                .map(|w| w.coefficients(pattern.window_size())),
            cfg: cfg.clone(),
            pattern,
            diffs,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn pattern(&self) -> &EmissionPattern {
        &self.pattern
    }

    /// Number of bins of the dense coarray grid.
    pub fn dense_bins(&self) -> usize {
        2 * self.pattern.window_size() - 1
    }

    /// Clutter filter then apodization, each when configured.
    pub fn postprocess(&self, z: CoarraySignal) -> Result<CoarraySignal> {
        let z = match &self.filter {
            Some(f) => clutter_filter(&z, f)?,
            None => z,
        };
        match &self.window {
            Some(w) => apodize(&z, w),
            None => Ok(z),
        }
    }

    /// Lag-averaged coarray of sampled data, before post-processing.
    pub fn raw_coarray(&self, snap: &SlowTimeSnapshots) -> Result<CoarraySignal> {
        let cov = estimate_covariance(snap, self.cfg.remove_mean)?;
        lag_average(&cov, &self.diffs)
    }

    pub fn coarray(&self, snap: &SlowTimeSnapshots) -> Result<CoarraySignal> {
        self.postprocess(self.raw_coarray(snap)?)
    }

    /// Exact-covariance coarray, before post-processing.
    pub fn raw_coarray_analytic(&self, tones: &ToneSet, noise: f64) -> Result<CoarraySignal> {
        let cov = CovarianceEstimate::exact(analytic_covariance(tones, &self.pattern, noise));
        lag_average(&cov, &self.diffs)
    }

    pub fn coarray_analytic(&self, tones: &ToneSet, noise: f64) -> Result<CoarraySignal> {
        self.postprocess(self.raw_coarray_analytic(tones, noise)?)
    }

    /// Runs a coarray estimator on a processed coarray signal.
    pub fn estimate_coarray(&self, z: &CoarraySignal, est: Estimator) -> Result<SpectrumEstimate> {
        let lag0 = z.at(0).re;
        match est {
            Estimator::Nest => Ok(SpectrumEstimate::Grid(nest(z, self.cfg.nest.resolve(lag0)))),
            Estimator::Nesprit => Ok(SpectrumEstimate::Lines(nesprit_with(
                z,
                &self.cfg.nesprit.options(lag0),
            )?)),
            Estimator::Welch => Err(Error::precondition(
                Module::Experiments,
                "the periodogram works on slow-time samples, not on the coarray",
            )),
        }
    }

    /// Periodogram of the snapshots. Sparse patterns need `welch.zero_fill`.
    pub fn welch(&self, snap: &SlowTimeSnapshots) -> Result<SpectrumEstimate> {
        Ok(SpectrumEstimate::Grid(welch_snapshots(
            snap,
            &self.cfg.welch,
        )?))
    }

    /// Mean periodogram for an exact autocorrelation `z` (unfiltered), on
    /// this pipeline's sampling pattern.
    pub fn welch_expected(&self, z: &CoarraySignal) -> Result<SpectrumEstimate> {
        let p = self.pattern.window_size();
        if !self.pattern.is_uniform() && !self.cfg.welch.zero_fill {
            return Err(Error::precondition(
                Module::Estimators,
                "Welch needs uniformly sampled data (enable zero-fill to compare on sparse data)",
            ));
        }
        if self.cfg.welch.segment_length.is_some_and(|l| l != p) {
            return Err(Error::precondition(
                Module::Experiments,
                "analytic periodogram supports a single full-window segment only",
            ));
        }
        let w = self.cfg.welch.window.coefficients(p);
        let energy: f64 = w.iter().map(|v| v * v).sum();
        let mut taper = vec![0.0; p];
        for &s in self.pattern.slots() {
            taper[s - 1] = w[s - 1];
        }
        Ok(SpectrumEstimate::Grid(expected_periodogram(
            z, &taper, energy,
        )?))
    }
}

/// Result of a single-CPI estimate.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub pattern: serde_json::Value,
    pub noise_power: f64,
    pub analytic: bool,
    pub results: Vec<(Estimator, SpectrumEstimate)>,
}

/// Generates one CPI from the config and runs each requested estimator.
pub fn run_estimate(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    let pipe = Pipeline::new(cfg)?;
    let frame = cfg.frame()?;
    let tones = frame.combined_tones()?;
    let noise = noise_for(&frame.tones, cfg.snr_db);
    let mut results = Vec::with_capacity(cfg.estimators.len());
    if cfg.analytic {
        let raw = pipe.raw_coarray_analytic(&tones, noise)?;
        let z = pipe.postprocess(raw.clone())?;
        for &est in &cfg.estimators {
            let out = match est {
                Estimator::Welch => pipe.welch_expected(&raw)?,
                _ => pipe.estimate_coarray(&z, est)?,
            };
            results.push((est, out));
        }
    } else {
        let snap = generate_snapshots(&tones, pipe.pattern(), cfg.q, noise, cfg.seed)?;
        let z = pipe.coarray(&snap)?;
        for &est in &cfg.estimators {
            let out = match est {
                Estimator::Welch => pipe.welch(&snap)?,
                _ => pipe.estimate_coarray(&z, est)?,
            };
            results.push((est, out));
        }
    }
    Ok(EstimateReport {
        pattern: pipe.pattern().to_json(),
        noise_power: noise,
        analytic: cfg.analytic,
        results,
    })
}
