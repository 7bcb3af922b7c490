//! Experiment harness behind the command-line tool: JSON configs, the
//! single-CPI pipeline, spectrograms, MSE sweeps and comparison reports.
//!
//! All core routines work in normalized frequency (cycles per slot); the
//! config layer converts velocities with [`Units`].

mod compare;
mod config;
mod design;
mod mse;
mod pipeline;
mod spectrogram;

pub use compare::{run_compare, CompareReport, EstimatorSummary, SUPPORT_MARGIN_BINS};
pub use config::{
    Estimator, ExperimentConfig, FilterSpec, NespritConfig, OutputFormat, PatternSpec, Threshold,
    ToneSpec, Units,
};
pub use design::{design_report, DesignReport};
pub use mse::{frequency_error, run_mse, MseRow, MseTable};
pub use pipeline::{noise_for, run_estimate, EstimateReport, Pipeline, SpectrumEstimate};
pub use spectrogram::{
    artifact_energy_db, profile_ridge, profile_support, ridge_stats, run_spectrogram,
    simulate_frames, spectrogram_from_frames, FrameData, RidgeStats, Spectrogram, SpectrogramFrame,
};
