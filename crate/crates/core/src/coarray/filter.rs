//! Clutter filtering in the correlation domain.
//!
//! Filtering a wide-sense stationary process with impulse response `h`
//! convolves its autocorrelation with `r_h[k] = Σ_n h[n + k] conj(h[n])`.
//! The coarray signal is convolved with `r_h` (zero outside its lag range)
//! and the central `2P - 1` lags are kept. IIR responses are truncated to
//! `4P` taps before forming `r_h`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CoarraySignal;
use crate::error::{Error, Module, Result};

/// Second-order IIR section, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn poles(&self) -> [Complex64; 2] {
        let [a1, a2] = self.a;
        let disc = Complex64::from(a1 * a1 - 4.0 * a2).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b[0] + z_inv * (self.b[1] + z_inv * self.b[2]);
        let den = 1.0 + z_inv * (self.a[0] + z_inv * self.a[1]);
        num / den
    }
}

/// A linear time-invariant clutter filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClutterFilter {
    /// FIR taps `h[0..L]`.
    Fir { taps: Vec<Complex64> },
    /// Direct-form IIR `b(z) / a(z)`, `a[0] != 0`.
    Iir { b: Vec<f64>, a: Vec<f64> },
    /// Cascade of second-order sections.
    Sos { sections: Vec<Biquad> },
}

impl ClutterFilter {
    /// Identity filter.
    pub fn identity() -> Self {
        ClutterFilter::Fir {
            taps: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Largest pole magnitude, 0 for FIR.
    pub fn max_pole_radius(&self) -> Result<f64> {
        match self {
            ClutterFilter::Fir { .. } => Ok(0.0),
            ClutterFilter::Sos { sections } => Ok(sections
                .iter()
                .flat_map(|s| s.poles())
                .map(|p| p.norm())
                .fold(0.0, f64::max)),
            ClutterFilter::Iir { a, .. } => polynomial_root_radius(a),
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            ClutterFilter::Fir { taps } if taps.is_empty() => Err(Error::precondition(
                Module::Coarray,
                "FIR filter needs at least one tap",
            )),
            ClutterFilter::Iir { b, a } if b.is_empty() || a.is_empty() || a[0] == 0.0 => {
                Err(Error::precondition(
                    Module::Coarray,
                    "IIR filter needs non-empty b and a with a[0] != 0",
                ))
            }
            _ => {
                let rho = self.max_pole_radius()?;
                if rho >= 1.0 {
                    Err(Error::UnstableFilter {
                        max_pole_radius: rho,
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// First `len` samples of the impulse response (the full tap list for FIR).
    pub fn impulse_response(&self, len: usize) -> Vec<Complex64> {
        match self {
            ClutterFilter::Fir { taps } => taps.clone(),
            ClutterFilter::Iir { b, a } => {
                let a0 = a[0];
                let mut y = vec![0.0f64; len];
                for n in 0..len {
                    let mut acc = if n < b.len() { b[n] } else { 0.0 };
                    for k in 1..a.len().min(n + 1) {
                        acc -= a[k] * y[n - k];
                    }
                    y[n] = acc / a0;
                }
                y.into_iter().map(Complex64::from).collect()
            }
            ClutterFilter::Sos { sections } => {
                let mut x: Vec<f64> = (0..len).map(|n| if n == 0 { 1.0 } else { 0.0 }).collect();
                for s in sections {
                    // Direct form II transposed.
                    let (mut s1, mut s2) = (0.0, 0.0);
                    for v in x.iter_mut() {
                        let input = *v;
                        let out = s.b[0] * input + s1;
                        s1 = s.b[1] * input - s.a[0] * out + s2;
                        s2 = s.b[2] * input - s.a[1] * out;
                        *v = out;
                    }
                }
                x.into_iter().map(Complex64::from).collect()
            }
        }
    }

    /// `H(e^{j 2π ν})`.
    pub fn frequency_response(&self, nu: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * nu);
        match self {
            ClutterFilter::Fir { taps } => {
                let mut acc = Complex64::default();
                let mut w = Complex64::new(1.0, 0.0);
                for t in taps {
                    acc += t * w;
                    w *= z_inv;
                }
                acc
            }
            ClutterFilter::Iir { b, a } => {
                let poly = |c: &[f64]| {
                    c.iter()
                        .rev()
                        .fold(Complex64::default(), |acc, &v| acc * z_inv + v)
                };
                poly(b) / poly(a)
            }
            ClutterFilter::Sos { sections } => sections.iter().map(|s| s.response(z_inv)).product(),
        }
    }

    /// Rough bound on the impulse-response energy discarded past `len`
    /// taps, from the largest pole radius. Zero for FIR.
    pub fn truncation_bound(&self, len: usize) -> Result<f64> {
        let rho = self.max_pole_radius()?;
        if rho == 0.0 {
            return Ok(0.0);
        }
        let h = self.impulse_response(len.max(1));
        let peak = h.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(peak * rho.powi(len as i32) / (1.0 - rho))
    }

    /// Number of response taps used for a coarray of window `p`.
    pub fn response_len(&self, p: usize) -> usize {
        match self {
            ClutterFilter::Fir { taps } => taps.len(),
            _ => 4 * p,
        }
    }
}

fn polynomial_root_radius(a: &[f64]) -> Result<f64> {
    // Trailing zero coefficients are roots at the origin.
    let trimmed: Vec<f64> = {
        let end = a.iter().rposition(|&v| v != 0.0).map_or(0, |i| i + 1);
        a[..end].to_vec()
    };
    let deg = trimmed.len().saturating_sub(1);
    if deg == 0 {
        return Ok(0.0);
    }
    // a0 z^deg + a1 z^(deg-1) + ... + a_deg: companion matrix eigenvalues.
    let a0 = trimmed[0];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -trimmed[j + 1] / a0;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    let eig = comp.complex_eigenvalues();
    if eig.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical {
            module: Module::Coarray,
            reason: "could not locate IIR poles".into(),
        });
    }
    Ok(eig.iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// Digital Butterworth high-pass, bilinear transform with prewarping.
///
/// `cutoff` is the -3 dB point in cycles per slot (normalized frequency,
/// same units as tone frequencies), strictly inside `(0, 1/2)`.
pub fn butterworth_highpass(order: usize, cutoff: f64) -> Result<ClutterFilter> {
    if order == 0 {
        return Err(Error::precondition(
            Module::Coarray,
            "Butterworth order must be at least 1",
        ));
    }
    if !(cutoff > 0.0 && cutoff < 0.5) {
        return Err(Error::precondition(
            Module::Coarray,
            format!("Butterworth cutoff {cutoff} outside (0, 1/2) cycles per slot"),
        ));
    }
    let pi = std::f64::consts::PI;
    // Prewarped analog cutoff for s = 2 (z - 1) / (z + 1).
    let wc = 2.0 * (pi * cutoff).tan();
    let digital_pole = |k: usize| {
        let theta = pi * (2 * k + order + 1) as f64 / (2 * order) as f64;
        let lp = Complex64::from_polar(1.0, theta);
        let hp = wc / lp;
        (2.0 + hp) / (2.0 - hp)
    };
    let mut sections = Vec::with_capacity(order.div_ceil(2));
    for k in 0..order / 2 {
        let p = digital_pole(k);
        sections.push(Biquad {
            b: [1.0, -2.0, 1.0],
            a: [-2.0 * p.re, p.norm_sqr()],
        });
    }
    if order % 2 == 1 {
        let p = digital_pole(order / 2).re;
        sections.push(Biquad {
            b: [1.0, -1.0, 0.0],
            a: [-p, 0.0],
        });
    }
    // Unit gain at Nyquist.
    let filter = ClutterFilter::Sos { sections };
    let gain = filter.frequency_response(0.5).norm();
    let ClutterFilter::Sos { mut sections } = filter else {
        unreachable!()
    };
    for v in sections[0].b.iter_mut() {
        *v /= gain;
    }
    Ok(ClutterFilter::Sos { sections })
}

/// Deterministic autocorrelation of `h` over lags `-(L-1)..=(L-1)`.
fn response_autocorrelation(h: &[Complex64]) -> Vec<Complex64> {
    let l = h.len() as i64;
    (-(l - 1)..l)
        .map(|k| {
            (0..l)
                .filter(|n| (0..l).contains(&(n + k)))
                .map(|n| h[(n + k) as usize] * h[n as usize].conj())
                .sum()
        })
        .collect()
}

/// `z * r_h`, kept on the original lag range.
pub fn clutter_filter(z: &CoarraySignal, filter: &ClutterFilter) -> Result<CoarraySignal> {
    filter.check()?;
    let p = z.window_size();
    let h = filter.impulse_response(filter.response_len(p));
    let rh = response_autocorrelation(&h);
    let half = (rh.len() / 2) as i64;
    let values = z
        .lags()
        .map(|lag| {
            (-half..=half)
                .filter(|k| (lag - k).abs() <= z.max_lag())
                .map(|k| rh[(k + half) as usize] * z.at(lag - k))
                .sum()
        })
        .collect();
    CoarraySignal::new(p, values)
}
