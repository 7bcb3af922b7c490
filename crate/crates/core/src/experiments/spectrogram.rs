use rayon::prelude::*;
use serde::Serialize;

use super::config::{Estimator, ExperimentConfig};
use super::pipeline::{noise_for, Pipeline, SpectrumEstimate};
use crate::array_design::EmissionPattern;
use crate::error::{Error, Module, Result};
use crate::estimators::{grid_bin, to_db, GridSpectrum, DB_FLOOR};
use crate::signal_model::{generate_pulsatile, PulsatileProfile, SlowTimeSnapshots};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrogramFrame {
    /// Start of the frame, in CPIs.
    pub cpi: usize,
    pub spectrum: GridSpectrum,
}

/// Time-ordered spectra on one shared grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrogram {
    pub estimator: Estimator,
    #[serde(serialize_with = "pattern_json")]
    pub pattern: EmissionPattern,
    pub frames: Vec<SpectrogramFrame>,
    /// Filter and window settings used.
    pub processing: serde_json::Value,
}

fn pattern_json<S: serde::Serializer>(
    p: &EmissionPattern,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    p.to_json().serialize(s)
}

impl Spectrogram {
    pub fn new(
        estimator: Estimator,
        pattern: EmissionPattern,
        frames: Vec<SpectrogramFrame>,
        processing: serde_json::Value,
    ) -> Result<Self> {
        if let Some(first) = frames.first() {
            let len = first.spectrum.len();
            if frames.iter().any(|f| f.spectrum.len() != len) {
                return Err(Error::precondition(
                    Module::Experiments,
                    "spectrogram frames must share one grid length",
                ));
            }
        }
        if frames.windows(2).any(|w| w[1].cpi <= w[0].cpi) {
            return Err(Error::precondition(
                Module::Experiments,
                "spectrogram timestamps must be strictly increasing",
            ));
        }
        Ok(Self {
            estimator,
            pattern,
            frames,
            processing,
        })
    }

    pub fn bins(&self) -> usize {
        self.frames.first().map_or(0, |f| f.spectrum.len())
    }

    /// Peak frequency of each frame.
    pub fn ridge(&self) -> Vec<f64> {
        self.frames
            .iter()
            .map(|f| f.spectrum.peak_frequency().unwrap_or(0.0))
            .collect()
    }

    /// dB image normalized to the global maximum, one row per frame.
    pub fn db_frames(&self) -> Vec<Vec<f64>> {
        let all: Vec<f64> = self
            .frames
            .iter()
            .flat_map(|f| f.spectrum.powers().iter().copied())
            .collect();
        let db = to_db(&all);
        db.chunks(self.bins().max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Long-format CSV: `cpi,bin,nu,power`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cpi,bin,nu,power\n");
        for f in &self.frames {
            for (i, p) in f.spectrum.powers().iter().enumerate() {
                out.push_str(&format!(
                    "{},{i},{:.12e},{:.12e}\n",
                    f.cpi,
                    f.spectrum.frequency(i),
                    p
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "estimator": self.estimator,
            "pattern": self.pattern.to_json(),
            "processing": self.processing,
            "bins": self.bins(),
            "cpi": self.frames.iter().map(|f| f.cpi).collect::<Vec<_>>(),
            "power": self.frames.iter().map(|f| f.spectrum.powers().to_vec()).collect::<Vec<_>>(),
        })
    }

    /// Binary graymap: columns are frames, rows are frequency bins with the
    /// highest frequency on top. 0 dB maps to white, the -60 dB floor to black.
    pub fn to_pgm(&self) -> Vec<u8> {
        let db = self.db_frames();
        let (w, h) = (db.len(), self.bins());
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        for row in (0..h).rev() {
            for frame in &db {
                let level = ((frame[row] - DB_FLOOR) / -DB_FLOOR * 255.0).round();
                out.push(level.clamp(0.0, 255.0) as u8);
            }
        }
        out
    }
}

/// Ground-truth ridge: the strongest blood tone of each frame.
pub fn profile_ridge(profile: &PulsatileProfile) -> Vec<f64> {
    profile
        .frames
        .iter()
        .map(|f| f.tones.peak().map_or(0.0, |t| t.nu))
        .collect()
}

/// Blood support `[min ν, max ν]` of each frame.
pub fn profile_support(profile: &PulsatileProfile) -> Vec<Option<(f64, f64)>> {
    profile.frames.iter().map(|f| f.tones.support()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RidgeStats {
    /// Fraction of frames whose peak is within one bin of the truth.
    pub within_one_bin: f64,
    pub mean_abs_bin_error: f64,
    pub max_abs_bin_error: usize,
}

fn circular_bin_distance(len: usize, a: usize, b: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(len - d)
}

pub fn ridge_stats(spec: &Spectrogram, truth: &[f64]) -> Result<RidgeStats> {
    if truth.len() != spec.frames.len() || spec.frames.is_empty() {
        return Err(Error::LengthMismatch {
            module: Module::Experiments,
            what: "ground-truth ridge vs spectrogram frames",
            expected: spec.frames.len(),
            actual: truth.len(),
        });
    }
    let len = spec.bins();
    let errs: Vec<usize> = spec
        .frames
        .iter()
        .zip(truth)
        .map(|(f, &nu)| {
            let peak = f.spectrum.peak_bin().unwrap_or(0);
            circular_bin_distance(len, peak, grid_bin(len, nu))
        })
        .collect();
    let n = errs.len() as f64;
    Ok(RidgeStats {
        within_one_bin: errs.iter().filter(|&&e| e <= 1).count() as f64 / n,
        mean_abs_bin_error: errs.iter().sum::<usize>() as f64 / n,
        max_abs_bin_error: errs.iter().copied().max().unwrap_or(0),
    })
}

/// Lower clamp for [`artifact_energy_db`] when nothing leaks.
pub const ARTIFACT_FLOOR_DB: f64 = -300.0;

/// Share of spectrogram power outside each frame's blood support (widened
/// by `margin_bins` grid bins on each side), in dB. Frames without a
/// support count entirely as artifact.
pub fn artifact_energy_db(
    spec: &Spectrogram,
    support: &[Option<(f64, f64)>],
    margin_bins: f64,
) -> Result<f64> {
    if support.len() != spec.frames.len() {
        return Err(Error::LengthMismatch {
            module: Module::Experiments,
            what: "support list vs spectrogram frames",
            expected: spec.frames.len(),
            actual: support.len(),
        });
    }
    let margin = margin_bins / spec.bins().max(1) as f64;
    let (mut outside, mut total) = (0.0, 0.0);
    for (f, sup) in spec.frames.iter().zip(support) {
        for (i, &p) in f.spectrum.powers().iter().enumerate() {
            let p = p.max(0.0);
            total += p;
            let nu = f.spectrum.frequency(i);
            let inside = sup.is_some_and(|(lo, hi)| nu >= lo - margin && nu <= hi + margin);
            if !inside {
                outside += p;
            }
        }
    }
    if total <= 0.0 {
        return Ok(DB_FLOOR);
    }
    Ok((10.0 * (outside / total).log10()).max(ARTIFACT_FLOOR_DB))
}

/// Simulated data for every frame of the configured profile.
#[derive(Debug, Clone)]
pub struct FrameData {
    pub profile: PulsatileProfile,
    pub noise_power: f64,
    /// One entry per frame; empty in analytic mode.
    pub snapshots: Vec<SlowTimeSnapshots>,
}

/// Noise is set from the mean blood power over all frames.
pub fn simulate_frames(cfg: &ExperimentConfig, pattern: &EmissionPattern) -> Result<FrameData> {
    let profile = cfg.profile()?;
    if profile.is_empty() {
        return Err(Error::Config("profile has no frames".into()));
    }
    let mean_blood = profile
        .frames
        .iter()
        .map(|f| f.tones.total_power())
        .sum::<f64>()
        / profile.len() as f64;
    let noise = if mean_blood > 0.0 {
        mean_blood / 10f64.powf(cfg.snr_db / 10.0)
    } else {
        noise_for(&Default::default(), cfg.snr_db)
    };
    let snapshots = if cfg.analytic {
        Vec::new()
    } else {
        generate_pulsatile(&profile, pattern, cfg.q, noise, cfg.seed)?
    };
    Ok(FrameData {
        profile,
        noise_power: noise,
        snapshots,
    })
}

fn processing_doc(cfg: &ExperimentConfig) -> serde_json::Value {
    serde_json::json!({
        "filter": cfg.filter,
        "window": cfg.window,
        "nest": cfg.nest,
        "nesprit": cfg.nesprit,
        "welch": cfg.welch,
        "analytic": cfg.analytic,
        "Q": cfg.q,
        "snr_db": cfg.snr_db,
    })
}

/// One spectrum per frame, computed in parallel and kept in frame order.
pub fn spectrogram_from_frames(
    pipe: &Pipeline,
    data: &FrameData,
    estimator: Estimator,
) -> Result<Spectrogram> {
    let dense = pipe.dense_bins();
    let n = data.profile.len();
    let spectra: Vec<GridSpectrum> = (0..n)
        .into_par_iter()
        .map(|i| {
            let est = if pipe.config().analytic {
                let tones = data.profile.frames[i].combined_tones()?;
                let raw = pipe.raw_coarray_analytic(&tones, data.noise_power)?;
                match estimator {
                    Estimator::Welch => pipe.welch_expected(&raw)?,
                    _ => pipe.estimate_coarray(&pipe.postprocess(raw)?, estimator)?,
                }
            } else {
                let snap = &data.snapshots[i];
                match estimator {
                    Estimator::Welch => pipe.welch(snap)?,
                    _ => pipe.estimate_coarray(&pipe.coarray(snap)?, estimator)?,
                }
            };
            Ok(match est {
                SpectrumEstimate::Lines(l) => l.rasterize(dense),
                SpectrumEstimate::Grid(g) => g,
            })
        })
        .collect::<Result<_>>()?;
    let step = data.profile.frame_cpis;
    let frames = spectra
        .into_iter()
        .enumerate()
        .map(|(i, spectrum)| SpectrogramFrame {
            cpi: i * step,
            spectrum,
        })
        .collect();
    Spectrogram::new(
        estimator,
        pipe.pattern().clone(),
        frames,
        processing_doc(pipe.config()),
    )
}

pub fn run_spectrogram(cfg: &ExperimentConfig, estimator: Estimator) -> Result<Spectrogram> {
    let pipe = Pipeline::new(cfg)?;
    let data = simulate_frames(cfg, pipe.pattern())?;
    spectrogram_from_frames(&pipe, &data, estimator)
}
