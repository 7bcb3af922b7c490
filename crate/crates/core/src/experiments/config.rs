use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::array_design::{
    build_coprime, build_klevel, build_nested, build_super_nested, optimal_klevel, optimal_nested,
    EmissionPattern, Family, KLevelParams, NestedPreference, PatternParams,
};
use crate::coarray::{butterworth_highpass, Biquad, ClutterFilter, Window};
use crate::error::{Error, Result};
use crate::estimators::{NespritOptions, WelchConfig};
use crate::signal_model::{
    ClutterTone, ProfileFrame, PulsatileProfile, SinusoidalTrajectory, Tone, ToneSet,
};

/// Transducer and timing constants for velocity conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Units {
    /// Center frequency, Hz.
    pub f0: f64,
    /// Pulse repetition frequency, Hz.
    pub fprf: f64,
    /// Speed of sound, m/s.
    pub c: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            f0: 3.5e6,
            fprf: 5e3,
            c: 1540.0,
        }
    }
}

impl Units {
    /// Axial velocity (m/s, positive away from the probe) to cycles per slot.
    pub fn velocity_to_nu(&self, v: f64) -> f64 {
        -2.0 * v * self.f0 / self.c / self.fprf
    }

    pub fn nu_to_velocity(&self, nu: f64) -> f64 {
        -nu * self.fprf * self.c / (2.0 * self.f0)
    }

    /// Largest unambiguous speed, m/s.
    pub fn max_velocity(&self) -> f64 {
        self.nu_to_velocity(-0.5)
    }

    fn validate(&self) -> Result<()> {
        if [self.f0, self.fprf, self.c]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
        {
            Ok(())
        } else {
            Err(Error::Config(
                "units f0, fprf and c must be positive".into(),
            ))
        }
    }
}

/// A tone given either as normalized frequency or as axial velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// m/s
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    pub power: f64,
}

impl ToneSpec {
    pub fn at(nu: f64, power: f64) -> Self {
        Self {
            nu: Some(nu),
            velocity: None,
            power,
        }
    }

    pub fn resolve(&self, units: &Units) -> Result<Tone> {
        let nu = match (self.nu, self.velocity) {
            (Some(nu), None) => nu,
            (None, Some(v)) => units.velocity_to_nu(v),
            _ => {
                return Err(Error::Config(
                    "each tone needs exactly one of 'nu' or 'velocity'".into(),
                ))
            }
        };
        Ok(Tone::new(nu, self.power))
    }
}

/// Which pattern to use; the optimal design for `P` when `params` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PatternParams>,
    #[serde(default)]
    pub preference: NestedPreference,
}

impl Default for PatternSpec {
    fn default() -> Self {
        Self {
            family: Family::Nested,
            params: None,
            preference: NestedPreference::default(),
        }
    }
}

impl PatternSpec {
    pub fn build(&self, p: usize) -> Result<EmissionPattern> {
        let pair = |what: &str| -> Result<Option<(usize, usize)>> {
            match &self.params {
                None | Some(PatternParams::None {}) => Ok(None),
                Some(PatternParams::Pair { n1, n2 }) => Ok(Some((*n1, *n2))),
                Some(PatternParams::Levels { .. }) => Err(Error::Config(format!(
                    "{what} pattern takes N1/N2, not levels"
                ))),
            }
        };
        let pattern = match self.family {
            Family::Standard => EmissionPattern::standard(p)?,
            Family::Nested => {
                let (n1, n2) = match pair("nested")? {
                    Some(v) => v,
                    None => optimal_nested(p, self.preference)?,
                };
                build_nested(n1, n2)?
            }
            Family::SuperNested => {
                let (n1, n2) = match pair("super_nested")? {
                    Some(v) => v,
                    None => optimal_nested(p, self.preference)?,
                };
                build_super_nested(n1, n2)?
            }
            Family::Coprime => {
                let (n1, n2) = pair("coprime")?
                    .ok_or_else(|| Error::Config("coprime pattern needs explicit N1/N2".into()))?;
                build_coprime(n1, n2)?
            }
            Family::KLevel => {
                let params = match &self.params {
                    Some(PatternParams::Levels { levels }) => KLevelParams::new(levels.clone(), p)?,
                    None | Some(PatternParams::None {}) => optimal_klevel(p)?,
                    Some(PatternParams::Pair { .. }) => {
                        return Err(Error::Config("k_level pattern takes levels".into()))
                    }
                };
                build_klevel(&params)
            }
        };
        if pattern.window_size() != p {
            return Err(Error::Config(format!(
                "{} pattern has window {} but P = {p}",
                self.family.as_str(),
                pattern.window_size()
            )));
        }
        Ok(pattern)
    }
}

impl FromStr for PatternSpec {
    type Err = Error;

    /// `family` or `family:a,b,...`, e.g. `nested:15,16` or `k_level:3,3,3,4`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let family: Family = name.trim().parse()?;
        let params = match args {
            None => None,
            Some(a) => {
                let nums = a
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Config(format!("bad pattern parameter '{v}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(match family {
                    Family::KLevel => PatternParams::Levels { levels: nums },
                    _ if nums.len() == 2 => PatternParams::Pair {
                        n1: nums[0],
                        n2: nums[1],
                    },
                    _ => {
                        return Err(Error::Config(format!(
                            "{} pattern takes two parameters N1,N2",
                            family.as_str()
                        )))
                    }
                })
            }
        };
        Ok(Self {
            family,
            params,
            preference: NestedPreference::default(),
        })
    }
}

/// Correlation-domain filter description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterSpec {
    /// High-pass; `cutoff` in cycles per slot.
    Butterworth {
        order: usize,
        cutoff: f64,
    },
    Fir {
        taps: Vec<f64>,
    },
    Iir {
        b: Vec<f64>,
        a: Vec<f64>,
    },
    Sos {
        sections: Vec<Biquad>,
    },
}

impl FilterSpec {
    pub fn build(&self) -> Result<ClutterFilter> {
        Ok(match self {
            FilterSpec::Butterworth { order, cutoff } => butterworth_highpass(*order, *cutoff)?,
            FilterSpec::Fir { taps } => ClutterFilter::Fir {
                taps: taps.iter().map(|&t| t.into()).collect(),
            },
            FilterSpec::Iir { b, a } => ClutterFilter::Iir {
                b: b.clone(),
                a: a.clone(),
            },
            FilterSpec::Sos { sections } => ClutterFilter::Sos {
                sections: sections.clone(),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Nest,
    Nesprit,
    Welch,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Nest, Estimator::Nesprit, Estimator::Welch];

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Nest => "nest",
            Estimator::Nesprit => "nesprit",
            Estimator::Welch => "welch",
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nest" => Ok(Estimator::Nest),
            "nesprit" => Ok(Estimator::Nesprit),
            "welch" => Ok(Estimator::Welch),
            other => Err(Error::Config(format!(
                "unknown estimator '{other}' (expected nest, nesprit or welch)"
            ))),
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Pgm,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "pgm" => Ok(OutputFormat::Pgm),
            other => Err(Error::Config(format!(
                "unknown format '{other}' (expected csv, json or pgm)"
            ))),
        }
    }
}

/// Threshold for one estimator. With `relative` set, the effective
/// threshold is `lambda * z(0)`, i.e. a fraction of the total power.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Threshold {
    pub lambda: f64,
    pub relative: bool,
}

impl Threshold {
    pub fn resolve(&self, lag0_power: f64) -> f64 {
        if self.relative {
            self.lambda * lag0_power
        } else {
            self.lambda
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NespritConfig {
    pub threshold: Threshold,
    /// Fixed model order, overriding the threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    pub subtract_noise: bool,
}

impl Default for NespritConfig {
    fn default() -> Self {
        Self {
            threshold: Threshold::default(),
            order: None,
            subtract_noise: true,
        }
    }
}

impl NespritConfig {
    pub fn options(&self, lag0_power: f64) -> NespritOptions {
        NespritOptions {
            lambda: self.threshold.resolve(lag0_power),
            order: self.order,
            subtract_noise: self.subtract_noise,
        }
    }
}

/// Full description of one experiment. Every field has a default, so `{}`
/// is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    #[serde(rename = "P")]
    pub p: usize,
    pub pattern: PatternSpec,
    pub units: Units,
    /// Blood tones of a stationary CPI.
    pub tones: Vec<ToneSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clutter: Option<ClutterTone>,
    /// Sinusoidal pulsatile profile for spectrograms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<SinusoidalTrajectory>,
    /// Explicit frame list for spectrograms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<PulsatileProfile>,
    /// Frame count when a spectrogram is built from stationary `tones`.
    pub frames: usize,
    /// Depth snapshots per CPI.
    #[serde(rename = "Q")]
    pub q: usize,
    pub snr_db: f64,
    pub snr_list: Vec<f64>,
    pub trials: usize,
    /// Use the exact covariance instead of sampled snapshots.
    pub analytic: bool,
    pub remove_mean: bool,
    pub nest: Threshold,
    pub nesprit: NespritConfig,
    pub welch: WelchConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterSpec>,
    /// Apodization window applied after the filter.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    pub estimators: Vec<Estimator>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            p: 256,
            pattern: PatternSpec::default(),
            units: Units::default(),
            tones: Vec::new(),
            clutter: None,
            trajectory: None,
            profile: None,
            frames: 1,
            q: 200,
            snr_db: 20.0,
            snr_list: vec![
                -20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0,
            ],
            trials: 1000,
            analytic: false,
            remove_mean: false,
            nest: Threshold::default(),
            nesprit: NespritConfig::default(),
            welch: WelchConfig::default(),
            filter: None,
            window: None,
            estimators: Estimator::ALL.to_vec(),
            seed: 0,
            out_dir: None,
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.p < 2 {
            return bad(format!("P must be at least 2 (got {})", self.p));
        }
        if self.q == 0 {
            return bad("Q must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.frames == 0 {
            return bad("frames must be at least 1".into());
        }
        if !self.snr_db.is_finite() || self.snr_list.iter().any(|s| !s.is_finite()) {
            return bad("SNR values must be finite".into());
        }
        if self.estimators.is_empty() {
            return bad("at least one estimator is required".into());
        }
        if self.nest.lambda < 0.0 || self.nesprit.threshold.lambda < 0.0 {
            return bad("thresholds must be nonnegative".into());
        }
        if self.trajectory.is_some() && self.profile.is_some() {
            return bad("give either 'trajectory' or 'profile', not both".into());
        }
        self.units.validate()?;
        self.blood_tones()?;
        self.pattern
            .build(self.p)
            .map_err(|e| Error::Config(format!("pattern: {e}")))?;
        if let Some(f) = &self.filter {
            f.build()
                .map_err(|e| Error::Config(format!("filter: {e}")))?;
        }
        if let Some(Window::Custom { coefficients }) = &self.window {
            if coefficients.len() != self.p {
                return bad(format!(
                    "custom window needs P = {} coefficients, got {}",
                    self.p,
                    coefficients.len()
                ));
            }
        }
        Ok(())
    }

    pub fn build_pattern(&self) -> Result<EmissionPattern> {
        self.pattern.build(self.p)
    }

    pub fn blood_tones(&self) -> Result<ToneSet> {
        let tones = self
            .tones
            .iter()
            .map(|t| t.resolve(&self.units))
            .collect::<Result<Vec<_>>>()?;
        ToneSet::new(tones).map_err(|e| Error::Config(format!("tones: {e}")))
    }

    /// Blood tones plus clutter for a single CPI.
    pub fn frame(&self) -> Result<ProfileFrame> {
        Ok(ProfileFrame {
            tones: self.blood_tones()?,
            clutter: self.clutter,
        })
    }

    /// Frame sequence for spectrograms: the trajectory, the explicit
    /// profile, or `frames` copies of the stationary tones.
    pub fn profile(&self) -> Result<PulsatileProfile> {
        if let Some(t) = &self.trajectory {
            return PulsatileProfile::sinusoidal(t);
        }
        if let Some(p) = &self.profile {
            p.validate()?;
            return Ok(p.clone());
        }
        let frame = self.frame()?;
        PulsatileProfile::new(vec![frame; self.frames])
    }

    pub fn build_filter(&self) -> Result<Option<ClutterFilter>> {
        self.filter.as_ref().map(FilterSpec::build).transpose()
    }
}
