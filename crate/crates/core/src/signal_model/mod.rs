//! Synthetic sparse slow-time data.
//!
//! Each CPI is a sum of complex exponentials with independent zero-mean
//! circular Gaussian amplitudes (redrawn for every depth snapshot) plus
//! white circular Gaussian noise. Slot `p` of the pattern is sampled at
//! phase `2π ν (p - 1)`.

mod container;

pub use container::{read_snapshots_binary, snapshots_to_csv, write_snapshots_binary};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array_design::EmissionPattern;
use crate::error::{Error, Module, Result};

/// One spectral line: normalized frequency `ν = f T` and power `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub nu: f64,
    pub power: f64,
}

impl Tone {
    pub fn new(nu: f64, power: f64) -> Self {
        Self { nu, power }
    }
}

/// Stationary tone content of one CPI.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ToneSet {
    tones: Vec<Tone>,
}

impl ToneSet {
    /// Checks `ν ∈ [-1/2, 1/2)` and `σ² >= 0` for every tone.
    pub fn new(tones: Vec<Tone>) -> Result<Self> {
        let set = Self { tones };
        set.validate()?;
        Ok(set)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.tones {
            if !(-0.5..0.5).contains(&t.nu) {
                return Err(Error::precondition(
                    Module::SignalModel,
                    format!("tone frequency {} outside [-1/2, 1/2)", t.nu),
                ));
            }
            if !(t.power >= 0.0 && t.power.is_finite()) {
                return Err(Error::precondition(
                    Module::SignalModel,
                    format!("tone power {} must be finite and nonnegative", t.power),
                ));
            }
        }
        Ok(())
    }

    pub fn tones(&self) -> &[Tone] {
        &self.tones
    }

    pub fn len(&self) -> usize {
        self.tones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tones.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.tones.iter().map(|t| t.power).sum()
    }

    /// The strongest tone.
    pub fn peak(&self) -> Option<Tone> {
        self.tones
            .iter()
            .copied()
            .max_by(|a, b| a.power.total_cmp(&b.power))
    }

    /// Frequency range `[min ν, max ν]` over tones with positive power.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.tones
            .iter()
            .filter(|t| t.power > 0.0)
            .fold(None, |acc, t| match acc {
                None => Some((t.nu, t.nu)),
                Some((lo, hi)) => Some((lo.min(t.nu), hi.max(t.nu))),
            })
    }

    pub fn with(mut self, tone: Tone) -> Result<Self> {
        self.tones.push(tone);
        self.validate()?;
        Ok(self)
    }
}

/// Noise power giving `snr_db = 10 log10(total tone power / σ²)`.
pub fn noise_power_for_snr(tones: &ToneSet, snr_db: f64) -> f64 {
    tones.total_power() / 10f64.powf(snr_db / 10.0)
}

/// `Q` depth snapshots of sparse slow-time samples, one row per snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowTimeSnapshots {
    pattern: EmissionPattern,
    data: DMatrix<Complex64>,
    noise_power: f64,
}

impl SlowTimeSnapshots {
    pub fn new(
        pattern: EmissionPattern,
        data: DMatrix<Complex64>,
        noise_power: f64,
    ) -> Result<Self> {
        if data.ncols() != pattern.len() {
            return Err(Error::LengthMismatch {
                module: Module::SignalModel,
                what: "snapshot columns vs pattern emissions",
                expected: pattern.len(),
                actual: data.ncols(),
            });
        }
        if data.nrows() == 0 {
            return Err(Error::precondition(
                Module::SignalModel,
                "snapshot matrix needs Q >= 1 rows",
            ));
        }
        Ok(Self {
            pattern,
            data,
            noise_power,
        })
    }

    pub fn pattern(&self) -> &EmissionPattern {
        &self.pattern
    }

    /// `Q x N` sample matrix.
    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn q(&self) -> usize {
        self.data.nrows()
    }

    /// Ground-truth noise power used to generate the data.
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// Keeps only the columns at `sub`'s slots. `sub` must live in the same
    /// window and use a subset of this pattern's slots.
    pub fn subsample(&self, sub: &EmissionPattern) -> Result<Self> {
        if sub.window_size() != self.pattern.window_size() {
            return Err(Error::precondition(
                Module::SignalModel,
                "subsampling pattern must share the window size",
            ));
        }
        let cols = sub
            .slots()
            .iter()
            .map(|s| {
                self.pattern.slots().binary_search(s).map_err(|_| {
                    Error::precondition(
                        Module::SignalModel,
                        format!("slot {s} is not sampled by the source pattern"),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let data = self.data.select_columns(cols.iter());
        Self::new(sub.clone(), data, self.noise_power)
    }

    /// `Q x P` matrix with each sample at its slot and zeros elsewhere.
    pub fn zero_filled(&self) -> Result<DMatrix<Complex64>> {
        let p = self.pattern.window_size();
        if self.pattern.max_slot() > p {
            return Err(Error::precondition(
                Module::SignalModel,
                "zero filling needs every emission inside the window",
            ));
        }
        let mut out = DMatrix::zeros(self.q(), p);
        for (j, &s) in self.pattern.slots().iter().enumerate() {
            out.set_column(s - 1, &self.data.column(j));
        }
        Ok(out)
    }
}

fn complex_gaussian<R: Rng>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

fn steering(nu: f64, slot: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * nu * (slot as f64 - 1.0))
}

fn snapshots_with_rng(
    tones: &ToneSet,
    pattern: &EmissionPattern,
    q: usize,
    noise_power: f64,
    rng: &mut ChaCha8Rng,
) -> DMatrix<Complex64> {
    let slots = pattern.slots();
    let n = slots.len();
    let phasors: Vec<Vec<Complex64>> = tones
        .tones()
        .iter()
        .map(|t| slots.iter().map(|&s| steering(t.nu, s)).collect())
        .collect();
    let mut data = DMatrix::zeros(q, n);
    let mut alphas = vec![Complex64::default(); tones.len()];
    for k in 0..q {
        for (a, t) in alphas.iter_mut().zip(tones.tones()) {
            *a = complex_gaussian(rng, t.power);
        }
        for j in 0..n {
            let mut v = complex_gaussian(rng, noise_power);
            for (a, ph) in alphas.iter().zip(&phasors) {
                v += a * ph[j];
            }
            data[(k, j)] = v;
        }
    }
    data
}

fn check_generation_inputs(tones: &ToneSet, q: usize, noise_power: f64) -> Result<()> {
    tones.validate()?;
    if q == 0 {
        return Err(Error::precondition(
            Module::SignalModel,
            "snapshot count Q must be >= 1",
        ));
    }
    if !(noise_power >= 0.0 && noise_power.is_finite()) {
        return Err(Error::precondition(
            Module::SignalModel,
            format!("noise power {noise_power} must be finite and nonnegative"),
        ));
    }
    Ok(())
}

/// Draws `Q` snapshots of the multi-tone model on `pattern`.
///
/// Deterministic in `seed`; stream 0 of the seeded generator is used so
/// that frame 0 of [`generate_pulsatile`] reproduces this call exactly.
pub fn generate_snapshots(
    tones: &ToneSet,
    pattern: &EmissionPattern,
    q: usize,
    noise_power: f64,
    seed: u64,
) -> Result<SlowTimeSnapshots> {
    generate_stream(tones, pattern, q, noise_power, seed, 0)
}

/// Like [`generate_snapshots`] but on an independent generator stream.
pub fn generate_stream(
    tones: &ToneSet,
    pattern: &EmissionPattern,
    q: usize,
    noise_power: f64,
    seed: u64,
    stream: u64,
) -> Result<SlowTimeSnapshots> {
    check_generation_inputs(tones, q, noise_power)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let data = snapshots_with_rng(tones, pattern, q, noise_power, &mut rng);
    SlowTimeSnapshots::new(pattern.clone(), data, noise_power)
}

/// Infinite-snapshot covariance `A R_α A^H + σ² I` on the pattern's slots.
pub fn analytic_covariance(
    tones: &ToneSet,
    pattern: &EmissionPattern,
    noise_power: f64,
) -> DMatrix<Complex64> {
    let slots = pattern.slots();
    let n = slots.len();
    DMatrix::from_fn(n, n, |a, b| {
        let lag = slots[a] as f64 - slots[b] as f64;
        let mut v: Complex64 = tones
            .tones()
            .iter()
            .map(|t| t.power * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t.nu * lag))
            .sum();
        if a == b {
            v += noise_power;
        }
        v
    })
}

/// Narrowband clutter added to one frame, relative to that frame's blood power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClutterTone {
    pub nu: f64,
    /// Clutter power over total blood power, in dB.
    pub relative_db: f64,
}

/// One CPI of a time-varying profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFrame {
    pub tones: ToneSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clutter: Option<ClutterTone>,
}

impl ProfileFrame {
    /// Blood tones plus the clutter line, if any.
    pub fn combined_tones(&self) -> Result<ToneSet> {
        match self.clutter {
            None => Ok(self.tones.clone()),
            Some(c) => {
                let power = self.tones.total_power() * 10f64.powf(c.relative_db / 10.0);
                self.tones.clone().with(Tone::new(c.nu, power))
            }
        }
    }
}

/// Sequence of stationary CPIs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulsatileProfile {
    pub frames: Vec<ProfileFrame>,
    /// Duration of each frame, in CPIs.
    #[serde(default = "one")]
    pub frame_cpis: usize,
}

fn one() -> usize {
    1
}

/// Parameters of a synthetic pulsatile trajectory.
///
/// Each frame holds a band of `band_tones` lines spaced `band_spacing` apart
/// with Gaussian-shaped powers centred on
/// `mean_nu + swing_nu * sin(2π f / period_frames)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinusoidalTrajectory {
    pub frames: usize,
    pub mean_nu: f64,
    pub swing_nu: f64,
    pub period_frames: f64,
    pub band_tones: usize,
    pub band_spacing: f64,
    /// Power of the central line; neighbours fall off as a Gaussian with
    /// standard deviation `band_width_tones` lines.
    pub peak_power: f64,
    pub band_width_tones: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clutter: Option<ClutterTone>,
}

impl SinusoidalTrajectory {
    pub fn center(&self, frame: usize) -> f64 {
        self.mean_nu
            + self.swing_nu * (2.0 * std::f64::consts::PI * frame as f64 / self.period_frames).sin()
    }
}

impl PulsatileProfile {
    pub fn new(frames: Vec<ProfileFrame>) -> Result<Self> {
        let p = Self {
            frames,
            frame_cpis: 1,
        };
        p.validate()?;
        Ok(p)
    }

    /// Single stationary frame.
    pub fn constant(tones: ToneSet) -> Self {
        Self {
            frames: vec![ProfileFrame {
                tones,
                clutter: None,
            }],
            frame_cpis: 1,
        }
    }

    pub fn sinusoidal(spec: &SinusoidalTrajectory) -> Result<Self> {
        if spec.band_tones == 0 || spec.frames == 0 {
            return Err(Error::precondition(
                Module::SignalModel,
                "trajectory needs at least one frame and one tone",
            ));
        }
        let mid = (spec.band_tones as f64 - 1.0) / 2.0;
        let frames = (0..spec.frames)
            .map(|f| {
                let c = spec.center(f);
                let tones = (0..spec.band_tones)
                    .map(|k| {
                        let off = k as f64 - mid;
                        let w = if spec.band_width_tones > 0.0 {
                            (-0.5 * (off / spec.band_width_tones).powi(2)).exp()
                        } else if off == 0.0 {
                            1.0
                        } else {
                            0.0
                        };
                        Tone::new(c + off * spec.band_spacing, spec.peak_power * w)
                    })
                    .collect();
                Ok(ProfileFrame {
                    tones: ToneSet::new(tones)?,
                    clutter: spec.clutter,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(frames)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_cpis == 0 {
            return Err(Error::precondition(
                Module::SignalModel,
                "frame duration must be at least one CPI",
            ));
        }
        for f in &self.frames {
            f.combined_tones()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// One [`SlowTimeSnapshots`] per frame. Frame `i` uses generator stream `i`
/// of `seed`, so frames are independent and the result does not depend on
/// how the work is scheduled.
pub fn generate_pulsatile(
    profile: &PulsatileProfile,
    pattern: &EmissionPattern,
    q: usize,
    noise_power: f64,
    seed: u64,
) -> Result<Vec<SlowTimeSnapshots>> {
    profile.validate()?;
    profile
        .frames
        .par_iter()
        .enumerate()
        .map(|(i, frame)| {
            let tones = frame.combined_tones()?;
            generate_stream(&tones, pattern, q, noise_power, seed, i as u64)
        })
        .collect()
}
