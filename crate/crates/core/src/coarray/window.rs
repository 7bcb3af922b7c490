//! Apodization in the correlation domain.
//!
//! Windowing the slow-time samples by `a[n]` multiplies their
//! autocorrelation by the window's own autocorrelation `R_a`.

use serde::{Deserialize, Serialize};

use super::CoarraySignal;
use crate::error::{Error, Module, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Window {
    Rectangular,
    Hamming,
    Hann,
    Blackman,
    Custom { coefficients: Vec<f64> },
}

impl Window {
    /// Symmetric window of `len` samples.
    pub fn coefficients(&self, len: usize) -> Vec<f64> {
        let cosine = |c: &[f64]| -> Vec<f64> {
            if len == 1 {
                return vec![1.0];
            }
            let m = (len - 1) as f64;
            (0..len)
                .map(|n| {
                    let x = 2.0 * std::f64::consts::PI * n as f64 / m;
                    c.iter()
                        .enumerate()
                        .map(|(k, ck)| {
                            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                            sign * ck * (k as f64 * x).cos()
                        })
                        .sum()
                })
                .collect()
        };
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hamming => cosine(&[0.54, 0.46]),
            Window::Hann => cosine(&[0.5, 0.5]),
            Window::Blackman => cosine(&[0.42, 0.5, 0.08]),
            Window::Custom { coefficients } => coefficients.clone(),
        }
    }
}

/// `R_a[l] = Σ_n a[n + l] a[n]` for `l` in `-(L-1)..=(L-1)`.
pub fn window_autocorrelation(a: &[f64]) -> Vec<f64> {
    let l = a.len() as i64;
    (-(l - 1)..l)
        .map(|k| {
            (0..l)
                .filter(|n| (0..l).contains(&(n + k)))
                .map(|n| a[(n + k) as usize] * a[n as usize])
                .sum()
        })
        .collect()
}

/// Multiplies `z` lag-wise by the autocorrelation of a length-`P` window.
pub fn apodize(z: &CoarraySignal, window: &[f64]) -> Result<CoarraySignal> {
    let p = z.window_size();
    if window.len() != p {
        return Err(Error::LengthMismatch {
            module: Module::Coarray,
            what: "apodization window (P samples)",
            expected: p,
            actual: window.len(),
        });
    }
    let ra = window_autocorrelation(window);
    let values = z.values().iter().zip(&ra).map(|(v, r)| v * *r).collect();
    CoarraySignal::new(p, values)
}
