use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::GridSpectrum;
use crate::coarray::{window_autocorrelation, CoarraySignal, Window};
use crate::error::{Error, Module, Result};
use crate::signal_model::SlowTimeSnapshots;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WelchConfig {
    /// Segment length; the full window `P` when unset.
    pub segment_length: Option<usize>,
    /// Fractional overlap between segments, in `[0, 1)`.
    pub overlap: f64,
    pub window: Window,
    /// Accept sparse data by inserting zeros at idle slots.
    pub zero_fill: bool,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            segment_length: None,
            overlap: 0.0,
            window: Window::Rectangular,
            zero_fill: false,
        }
    }
}

/// Averaged windowed periodogram of uniformly sampled rows.
///
/// `data` is `Q x P`, one slow-time record per row. Each record is cut into
/// segments of `segment_length` with the given fractional overlap; every
/// segment contributes `|DFT(w x)|² / Σ w²`. The result has one bin per
/// segment sample, centered on zero.
pub fn welch(
    data: &DMatrix<Complex64>,
    segment_length: usize,
    overlap: f64,
    window: &[f64],
) -> Result<GridSpectrum> {
    let p = data.ncols();
    if segment_length == 0 || segment_length > p {
        return Err(Error::precondition(
            Module::Estimators,
            format!("Welch segment length {segment_length} must be in 1..={p} (record length)"),
        ));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::precondition(
            Module::Estimators,
            format!("Welch overlap {overlap} outside [0, 1)"),
        ));
    }
    if window.len() != segment_length {
        return Err(Error::LengthMismatch {
            module: Module::Estimators,
            what: "Welch window vs segment length",
            expected: segment_length,
            actual: window.len(),
        });
    }
    let energy: f64 = window.iter().map(|w| w * w).sum();
    if energy <= 0.0 || data.nrows() == 0 {
        return Err(Error::precondition(
            Module::Estimators,
            "Welch needs a nonzero window and at least one record",
        ));
    }
    let l = segment_length;
    let hop = (l - (overlap * l as f64).floor() as usize).max(1);
    let fft = FftPlanner::new().plan_fft_forward(l);
    let mut acc = vec![0.0; l];
    let mut count = 0usize;
    let mut buf = vec![Complex64::default(); l];
    for row in data.row_iter() {
        let mut start = 0;
        while start + l <= p {
            for (n, b) in buf.iter_mut().enumerate() {
                *b = row[start + n] * window[n];
            }
            fft.process(&mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b.norm_sqr();
            }
            count += 1;
            start += hop;
        }
    }
    let scale = 1.0 / (energy * count as f64);
    let half = (l / 2) as i64;
    let powers = (0..l)
        .map(|i| acc[(i as i64 - half).rem_euclid(l as i64) as usize] * scale)
        .collect();
    Ok(GridSpectrum::new(powers))
}

/// Periodogram of slow-time snapshots, zero-filling sparse patterns when
/// allowed by the config.
pub fn welch_snapshots(snap: &SlowTimeSnapshots, cfg: &WelchConfig) -> Result<GridSpectrum> {
    let pattern = snap.pattern();
    let uniform = pattern.is_uniform();
    if !uniform && !cfg.zero_fill {
        return Err(Error::precondition(
            Module::Estimators,
            format!(
                "Welch needs uniformly sampled data; pattern has {} of {} slots (enable zero-fill to compare on sparse data)",
                pattern.len(),
                pattern.window_size()
            ),
        ));
    }
    let data = if uniform {
        snap.data().clone()
    } else {
        snap.zero_filled()?
    };
    let l = cfg.segment_length.unwrap_or(data.ncols());
    welch(&data, l, cfg.overlap, &cfg.window.coefficients(l))
}

/// Expected single-segment periodogram for a known autocorrelation.
///
/// `taper` holds one weight per slot of the window (the analysis window
/// times the sampling mask, zero at idle slots). The result is the mean of
/// `|DFT(taper x)|² / Σ w²` with `w` the analysis window, evaluated on a
/// `P`-bin grid. `window_energy` is `Σ w²`.
pub fn expected_periodogram(
    z: &CoarraySignal,
    taper: &[f64],
    window_energy: f64,
) -> Result<GridSpectrum> {
    let p = z.window_size();
    if taper.len() != p {
        return Err(Error::LengthMismatch {
            module: Module::Estimators,
            what: "periodogram taper (P samples)",
            expected: p,
            actual: taper.len(),
        });
    }
    if window_energy <= 0.0 {
        return Err(Error::precondition(
            Module::Estimators,
            "periodogram window energy must be positive",
        ));
    }
    let ra = window_autocorrelation(taper);
    let weighted =
        CoarraySignal::new(p, z.values().iter().zip(&ra).map(|(v, r)| v * *r).collect())?;
    let half = (p / 2) as i64;
    let tau = 2.0 * std::f64::consts::PI;
    let powers = (0..p)
        .map(|i| {
            let nu = (i as i64 - half) as f64 / p as f64;
            let s: Complex64 = weighted
                .lags()
                .map(|l| weighted.at(l) * Complex64::from_polar(1.0, -tau * nu * l as f64))
                .sum();
            s.re / window_energy
        })
        .collect();
    Ok(GridSpectrum::new(powers))
}
