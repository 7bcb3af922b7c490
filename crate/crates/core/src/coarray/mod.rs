//! Coarray processing: from sparse snapshots to a full-range autocorrelation.
//!
//! The sample covariance of the `N` emissions is averaged over every entry
//! that shares a lag, giving one value per lag in `[-(P-1), P-1]`. With a
//! contiguous difference set that is the whole uniform autocorrelation, so
//! ordinary FIR/IIR clutter filters and apodization windows can be applied
//! to it directly.

mod filter;
mod window;

pub use filter::{butterworth_highpass, clutter_filter, Biquad, ClutterFilter};
pub use window::{apodize, window_autocorrelation, Window};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array_design::DifferenceSet;
use crate::error::{Error, Module, Result};
use crate::signal_model::SlowTimeSnapshots;

/// Autocorrelation estimate over lags `-(P-1)..=(P-1)`.
///
/// Stored with lag `l` at index `l + P - 1`, so lag 0 sits in the middle.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarraySignal {
    p: usize,
    values: Vec<Complex64>,
}

impl CoarraySignal {
    pub fn new(p: usize, values: Vec<Complex64>) -> Result<Self> {
        if p == 0 || values.len() != 2 * p - 1 {
            return Err(Error::LengthMismatch {
                module: Module::Coarray,
                what: "coarray signal (2P-1 lags)",
                expected: 2 * p.max(1) - 1,
                actual: values.len(),
            });
        }
        Ok(Self { p, values })
    }

    /// Builds a signal from a function of the lag.
    pub fn from_fn(p: usize, f: impl Fn(i64) -> Complex64) -> Self {
        let max = p as i64 - 1;
        Self {
            p,
            values: (-max..=max).map(f).collect(),
        }
    }

    pub fn window_size(&self) -> usize {
        self.p
    }

    pub fn max_lag(&self) -> i64 {
        self.p as i64 - 1
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn lags(&self) -> impl Iterator<Item = i64> {
        -self.max_lag()..=self.max_lag()
    }

    /// Value at `lag`; panics outside `[-(P-1), P-1]`.
    pub fn at(&self, lag: i64) -> Complex64 {
        self.values[(lag + self.max_lag()) as usize]
    }

    /// Value at `lag`, zero outside the stored range.
    pub fn get(&self, lag: i64) -> Complex64 {
        if lag.abs() <= self.max_lag() {
            self.at(lag)
        } else {
            Complex64::default()
        }
    }

    /// Largest `|z(-l) - conj(z(l))|` relative to `|z(0)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.at(0).norm().max(f64::MIN_POSITIVE);
        (0..=self.max_lag())
            .map(|l| (self.at(-l) - self.at(l).conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// CSV with columns `lag,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,re,im\n");
        for (l, v) in self.lags().zip(&self.values) {
            out.push_str(&format!("{l},{:e},{:e}\n", v.re, v.im));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CoarrayDoc {
            p: self.p,
            lags: self.lags().collect(),
            re: self.values.iter().map(|v| v.re).collect(),
            im: self.values.iter().map(|v| v.im).collect(),
        })
        .expect("coarray is serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let doc: CoarrayDoc = serde_json::from_value(value.clone()).map_err(|e| Error::Format {
            module: Module::Coarray,
            reason: format!("coarray JSON: {e}"),
        })?;
        if doc.re.len() != doc.im.len() {
            return Err(Error::Format {
                module: Module::Coarray,
                reason: "re and im arrays differ in length".into(),
            });
        }
        let values = doc
            .re
            .iter()
            .zip(&doc.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Self::new(doc.p, values)
    }
}

#[derive(Serialize, Deserialize)]
struct CoarrayDoc {
    #[serde(rename = "P")]
    p: usize,
    lags: Vec<i64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Sample covariance of the sparse slow-time vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub matrix: DMatrix<Complex64>,
    pub q_used: usize,
    pub mean_removed: bool,
}

impl CovarianceEstimate {
    /// Wraps an exact covariance (no sampling), e.g. an analytic model.
    pub fn exact(matrix: DMatrix<Complex64>) -> Self {
        Self {
            matrix: hermitian_part(&matrix),
            q_used: 0,
            mean_removed: false,
        }
    }
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).map(|v| v * 0.5)
}

/// `(1/Q) Σ_k y_k y_k^H`, optionally after removing the across-snapshot mean.
pub fn estimate_covariance(
    snapshots: &SlowTimeSnapshots,
    remove_mean: bool,
) -> Result<CovarianceEstimate> {
    let q = snapshots.q();
    if remove_mean && q < 2 {
        return Err(Error::precondition(
            Module::Coarray,
            "mean removal needs Q >= 2 snapshots",
        ));
    }
    let mut y = snapshots.data().clone();
    if remove_mean {
        for mut col in y.column_iter_mut() {
            let mean = col.sum() / q as f64;
            col.add_scalar_mut(-mean);
        }
    }
    // Rows are snapshots, so R = Yᵀ conj(Y) / Q.
    let r = y.transpose() * y.conjugate() / Complex64::from(q as f64);
    Ok(CovarianceEstimate {
        matrix: hermitian_part(&r),
        q_used: q,
        mean_removed: remove_mean,
    })
}

/// Averages covariance entries sharing a lag into the coarray signal.
///
/// Every lag in `[-(P-1), P-1]` must be realised by the pattern; lags
/// beyond the window (co-prime patterns) are ignored.
pub fn lag_average(cov: &CovarianceEstimate, diffs: &DifferenceSet) -> Result<CoarraySignal> {
    let n = diffs.pattern_len();
    if cov.matrix.nrows() != n || cov.matrix.ncols() != n {
        return Err(Error::LengthMismatch {
            module: Module::Coarray,
            what: "covariance size vs pattern emissions",
            expected: n,
            actual: cov.matrix.nrows(),
        });
    }
    let p = diffs.window_size();
    let max_lag = p as i64 - 1;
    let missing = diffs.missing_in(max_lag);
    if !missing.is_empty() {
        return Err(Error::NonContiguousCoarray { max_lag, missing });
    }
    // nalgebra storage is column-major, matching the column-stacked vec().
    let vec = cov.matrix.as_slice();
    let values = (-max_lag..=max_lag)
        .map(|lag| {
            let idx = diffs.index_set(lag);
            idx.iter().map(|&i| vec[i]).sum::<Complex64>() / idx.len() as f64
        })
        .collect();
    CoarraySignal::new(p, values)
}

/// `P x P` Hermitian Toeplitz matrix with `R[i, j] = z(i - j)`.
pub fn build_toeplitz(z: &CoarraySignal) -> DMatrix<Complex64> {
    let p = z.window_size();
    DMatrix::from_fn(p, p, |i, j| z.at(i as i64 - j as i64))
}
