use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::{eigenvalues, hermitian_eigen_desc, pinv, PINV_RCOND};
use super::{Line, LineSpectrum};
use crate::coarray::{build_toeplitz, CoarraySignal};
use crate::error::{Error, Module, Result};

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NespritOptions {
    /// Eigenvalue threshold for the model order.
    pub lambda: f64,
    /// Fixed model order; overrides `lambda` when set.
    pub order: Option<usize>,
    /// Subtract the noise-floor estimate from lag 0 before the power fit.
    pub subtract_noise: bool,
}

impl Default for NespritOptions {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            order: None,
            subtract_noise: true,
        }
    }
}

/// Mean of the eigenvalues past the first `m`, clamped at zero.
pub fn estimate_noise_floor(eigenvalues: &[f64], m: usize) -> Result<f64> {
    if m >= eigenvalues.len() {
        return Err(Error::precondition(
            Module::Estimators,
            format!(
                "noise floor needs M < P (M={m}, {} eigenvalues)",
                eigenvalues.len()
            ),
        ));
    }
    let tail = &eigenvalues[m..];
    Ok((tail.iter().sum::<f64>() / tail.len() as f64).max(0.0))
}

/// Subspace line estimate with threshold rank selection.
pub fn nesprit(z: &CoarraySignal, lambda: f64) -> Result<LineSpectrum> {
    nesprit_with(
        z,
        &NespritOptions {
            lambda,
            ..NespritOptions::default()
        },
    )
}

pub fn nesprit_with(z: &CoarraySignal, opts: &NespritOptions) -> Result<LineSpectrum> {
    let p = z.window_size();
    let r = build_toeplitz(z);
    let (vals, vecs) = hermitian_eigen_desc(&r);
    let m = match opts.order {
        Some(m) => m,
        None => vals.iter().filter(|&&v| v > opts.lambda).count(),
    };
    if m > p.saturating_sub(1) {
        return Err(Error::ModelOrder {
            order: m,
            max: p.saturating_sub(1),
        });
    }
    let noise = estimate_noise_floor(&vals, m)?;
    if m == 0 {
        return Ok(LineSpectrum {
            lines: Vec::new(),
            model_order: 0,
            noise_estimate: noise,
        });
    }

    // Rotational invariance between the first and last P-1 rows.
    let e = vecs.columns(0, m);
    let e1 = e.rows(0, p - 1).into_owned();
    let e2 = e.rows(1, p - 1).into_owned();
    let psi = pinv(&e1, PINV_RCOND) * e2;
    let mut nus: Vec<f64> = eigenvalues(&psi)?
        .iter()
        .map(|b| wrap_frequency(b.arg() / TAU))
        .collect();
    nus.sort_by(f64::total_cmp);

    // Least-squares powers on the full lag range.
    let a = DMatrix::from_fn(2 * p - 1, m, |i, k| {
        let lag = i as f64 - (p as f64 - 1.0);
        Complex64::from_polar(1.0, TAU * nus[k] * lag)
    });
    let mut target = DVector::from_column_slice(z.values());
    if opts.subtract_noise {
        target[p - 1] -= noise;
    }
    let powers = pinv(&a, PINV_RCOND) * target;

    let lines = nus
        .iter()
        .zip(powers.iter())
        .map(|(&nu, pw)| Line { nu, power: pw.re })
        .collect();
    Ok(LineSpectrum {
        lines,
        model_order: m,
        noise_estimate: noise,
    })
}

fn wrap_frequency(nu: f64) -> f64 {
    let w = nu - nu.floor();
    if w >= 0.5 {
        w - 1.0
    } else {
        w
    }
}

impl LineSpectrum {
    /// `Ā p̂` on the lags of a `p`-slot window, plus the noise estimate at
    /// lag 0 when `with_noise` is set.
    pub fn synthesize(&self, p: usize, with_noise: bool) -> CoarraySignal {
        CoarraySignal::from_fn(p, |lag| {
            let s: Complex64 = self
                .lines
                .iter()
                .map(|l| Complex64::from_polar(l.power, TAU * l.nu * lag as f64))
                .sum();
            if with_noise && lag == 0 {
                s + self.noise_estimate
            } else {
                s
            }
        })
    }
}
