//! Power-spectrum estimators working on the coarray signal, plus the
//! periodogram baseline on uniform data.

mod linalg;
mod nesprit;
mod nest;
mod welch;

pub use linalg::{eigenvalues, hermitian_eigen_desc, pinv, PINV_RCOND};
pub use nesprit::{estimate_noise_floor, nesprit, nesprit_with, NespritOptions};
pub use nest::nest;
pub use welch::{expected_periodogram, welch, welch_snapshots, WelchConfig};

use serde::{Deserialize, Serialize};

/// Display floor for dB conversion.
pub const DB_FLOOR: f64 = -60.0;

/// Powers on a uniform frequency grid, centered on zero.
///
/// Bin `i` of an `L`-bin spectrum sits at `ν = (i - ⌊L/2⌋) / L`. NEST
/// produces `L = 2P - 1`; the periodogram produces one bin per segment
/// sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpectrum {
    powers: Vec<f64>,
}

impl GridSpectrum {
    pub fn new(powers: Vec<f64>) -> Self {
        Self { powers }
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        grid_frequency(self.len(), bin)
    }

    /// Bin nearest to `nu`, with wrap-around at ±1/2.
    pub fn bin_of(&self, nu: f64) -> usize {
        grid_bin(self.len(), nu)
    }

    /// Index of the largest bin (first one on ties).
    pub fn peak_bin(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &p) in self.powers.iter().enumerate() {
            if best.is_none_or(|b| p > self.powers[b]) {
                best = Some(i);
            }
        }
        best
    }

    pub fn peak_frequency(&self) -> Option<f64> {
        self.peak_bin().map(|b| self.frequency(b))
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    /// `10 log10(p / max)`, clipped at [`DB_FLOOR`].
    pub fn to_db(&self) -> Vec<f64> {
        to_db(&self.powers)
    }

    /// `bin,nu,power`, bins in ascending frequency.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin,nu,power\n");
        for (i, p) in self.powers.iter().enumerate() {
            out.push_str(&format!("{i},{:.12e},{:.12e}\n", self.frequency(i), p));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "bins": self.len(),
            "nu": (0..self.len()).map(|i| self.frequency(i)).collect::<Vec<_>>(),
            "power": self.powers,
        })
    }
}

pub fn grid_frequency(len: usize, bin: usize) -> f64 {
    (bin as f64 - (len / 2) as f64) / len as f64
}

pub fn grid_bin(len: usize, nu: f64) -> usize {
    let l = len as i64;
    let k = (nu * len as f64).round() as i64 + l / 2;
    k.rem_euclid(l) as usize
}

/// Relative dB with a -60 dB floor; an all-zero input maps to the floor.
pub fn to_db(powers: &[f64]) -> Vec<f64> {
    let max = powers.iter().copied().fold(0.0, f64::max);
    powers
        .iter()
        .map(|&p| {
            if max <= 0.0 || p <= 0.0 {
                DB_FLOOR
            } else {
                (10.0 * (p / max).log10()).max(DB_FLOOR)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub nu: f64,
    pub power: f64,
}

/// Gridless estimate: a set of spectral lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSpectrum {
    /// Sorted by frequency.
    pub lines: Vec<Line>,
    pub model_order: usize,
    pub noise_estimate: f64,
}

impl LineSpectrum {
    /// Line with the largest power.
    pub fn strongest(&self) -> Option<Line> {
        self.lines
            .iter()
            .copied()
            .reduce(|a, b| if b.power > a.power { b } else { a })
    }

    /// Drops each line into its nearest bin of an `len`-bin grid.
    /// Negative least-squares powers are clamped to zero.
    pub fn rasterize(&self, len: usize) -> GridSpectrum {
        let mut powers = vec![0.0; len];
        for l in &self.lines {
            powers[grid_bin(len, l.nu)] += l.power.max(0.0);
        }
        GridSpectrum::new(powers)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("nu,power\n");
        for l in &self.lines {
            out.push_str(&format!("{:.15e},{:.15e}\n", l.nu, l.power));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("line spectrum serializes")
    }
}
