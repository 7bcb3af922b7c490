//! Sparse emission pattern construction.
//!
//! A pattern is a strictly increasing set of 1-based slot indices inside a
//! coherent processing window of `P` slots. Every family here except the
//! co-prime one keeps all emissions inside the window; co-prime patterns may
//! emit past `P` and record both the window size and the largest slot.
//!
//! The nested family (a dense block `1..=N1` followed by a sparse block of
//! multiples of `N1 + 1`) has a difference set that fills every lag in
//! `[-(P-1), P-1]`, which is what the coarray estimators rely on.

mod difference;
mod optimize;

pub use difference::{difference_set, missing_lags, verify_contiguous_coarray, DifferenceSet};
pub use optimize::{divisors, optimal_klevel, optimal_nested, prime_factors, NestedPreference};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Module, Result};

/// Pattern family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Standard,
    Nested,
    SuperNested,
    Coprime,
    KLevel,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Standard => "standard",
            Family::Nested => "nested",
            Family::SuperNested => "super_nested",
            Family::Coprime => "coprime",
            Family::KLevel => "k_level",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" | "ula" => Ok(Family::Standard),
            "nested" => Ok(Family::Nested),
            "super_nested" | "super-nested" => Ok(Family::SuperNested),
            "coprime" | "co-prime" => Ok(Family::Coprime),
            "k_level" | "klevel" | "k-level" => Ok(Family::KLevel),
            other => Err(Error::Config(format!("unknown pattern family '{other}'"))),
        }
    }
}

/// Construction parameters, one variant per family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatternParams {
    Pair {
        #[serde(rename = "N1")]
        n1: usize,
        #[serde(rename = "N2")]
        n2: usize,
    },
    Levels {
        levels: Vec<usize>,
    },
    None {},
}

/// Nesting levels `N_1..N_K` of a K-level nested pattern.
///
/// Window size is `N_K * prod_{i<K} (N_i + 1)`. `N_K > 1` whenever `K > 1`,
/// since a final level of one folds into the previous level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KLevelParams {
    levels: Vec<usize>,
}

impl KLevelParams {
    /// Validates the levels against the target window size `p`.
    pub fn new(levels: Vec<usize>, p: usize) -> Result<Self> {
        let params = Self::from_levels(levels)?;
        let window = params.window_size();
        if window != p {
            return Err(Error::precondition(
                Module::ArrayDesign,
                format!(
                    "k-level product constraint N_K*prod(N_i+1) = {window} does not equal P = {p}"
                ),
            ));
        }
        Ok(params)
    }

    /// Validates the levels and derives the window size from them.
    pub fn from_levels(levels: Vec<usize>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::precondition(
                Module::ArrayDesign,
                "k-level pattern needs at least one level",
            ));
        }
        if levels.contains(&0) {
            return Err(Error::precondition(
                Module::ArrayDesign,
                "k-level levels must be positive",
            ));
        }
        if levels.len() > 1 && levels[levels.len() - 1] < 2 {
            return Err(Error::precondition(
                Module::ArrayDesign,
                "k-level last level N_K must exceed 1 when K > 1",
            ));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Number of nesting levels `K`.
    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn window_size(&self) -> usize {
        let (last, inner) = self.levels.split_last().expect("validated non-empty");
        inner.iter().map(|n| n + 1).product::<usize>() * last
    }

    /// Total number of emissions, `sum N_i`.
    pub fn transmissions(&self) -> usize {
        self.levels.iter().sum()
    }
}

/// A set of pulse emission slots inside a CPI window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmissionPattern {
    window_size: usize,
    slots: Vec<usize>,
    family: Family,
    params: PatternParams,
}

impl EmissionPattern {
    fn new(window_size: usize, slots: Vec<usize>, family: Family, params: PatternParams) -> Self {
        debug_assert!(slots.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(slots.first().is_some_and(|&s| s >= 1));
        Self {
            window_size,
            slots,
            family,
            params,
        }
    }

    /// Fully populated pattern `{1, ..., P}`.
    pub fn standard(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::precondition(
                Module::ArrayDesign,
                "window size P must be positive",
            ));
        }
        Ok(Self::new(
            p,
            (1..=p).collect(),
            Family::Standard,
            PatternParams::None {},
        ))
    }

    /// Window size `P` (slots per CPI).
    pub fn window_size(&self) -> usize {
        self.window_size
    }

    /// 1-based slot indices, strictly increasing.
    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    /// Number of emissions `N`.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn max_slot(&self) -> usize {
        *self.slots.last().expect("patterns are non-empty")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &PatternParams {
        &self.params
    }

    /// True when every emission sits at its own slot of a uniform window.
    pub fn is_uniform(&self) -> bool {
        self.slots.len() == self.window_size && self.max_slot() == self.window_size
    }

    /// Fraction of the window's pulses that are not transmitted.
    pub fn savings(&self) -> f64 {
        1.0 - self.len() as f64 / self.window_size as f64
    }

    /// Idle runs (maximal sets of consecutive unused slots) as sizes, in
    /// order, over `1..=max(P, max_slot)`.
    pub fn gaps(&self) -> Vec<usize> {
        let end = self.window_size.max(self.max_slot());
        let mut gaps = Vec::new();
        let mut prev = 0usize;
        for &s in self.slots.iter().chain(std::iter::once(&(end + 1))) {
            if s > prev + 1 {
                gaps.push(s - prev - 1);
            }
            prev = s;
        }
        gaps
    }

    /// Serializes as `{"P", "family", "slots", "params"}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PatternDoc::from(self)).expect("pattern is serializable")
    }

    /// Parses the JSON form and rebuilds the pattern from its parameters,
    /// rejecting documents whose slots disagree with the family construction.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let doc: PatternDoc = serde_json::from_value(value.clone()).map_err(|e| Error::Format {
            module: Module::ArrayDesign,
            reason: format!("pattern JSON: {e}"),
        })?;
        let rebuilt = match (doc.family, &doc.params) {
            (Family::Standard, _) => Self::standard(doc.p)?,
            (Family::Nested, PatternParams::Pair { n1, n2 }) => build_nested(*n1, *n2)?,
            (Family::SuperNested, PatternParams::Pair { n1, n2 }) => build_super_nested(*n1, *n2)?,
            (Family::Coprime, PatternParams::Pair { n1, n2 }) => build_coprime(*n1, *n2)?,
            (Family::KLevel, PatternParams::Levels { levels }) => {
                build_klevel(&KLevelParams::new(levels.clone(), doc.p)?)
            }
            (family, _) => {
                return Err(Error::Format {
                    module: Module::ArrayDesign,
                    reason: format!("params do not match family '{}'", family.as_str()),
                })
            }
        };
        if rebuilt.window_size != doc.p || rebuilt.slots != doc.slots {
            return Err(Error::Format {
                module: Module::ArrayDesign,
                reason: "slots or P inconsistent with family parameters".into(),
            });
        }
        Ok(rebuilt)
    }
}

#[derive(Serialize, Deserialize)]
struct PatternDoc {
    #[serde(rename = "P")]
    p: usize,
    family: Family,
    slots: Vec<usize>,
    params: PatternParams,
}

impl From<&EmissionPattern> for PatternDoc {
    fn from(p: &EmissionPattern) -> Self {
        Self {
            p: p.window_size,
            family: p.family,
            slots: p.slots.clone(),
            params: p.params.clone(),
        }
    }
}

/// Two-level nested pattern: `{1..N1} ∪ {n(N1+1) : n = 1..N2}`, `P = N2(N1+1)`.
pub fn build_nested(n1: usize, n2: usize) -> Result<EmissionPattern> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::precondition(
            Module::ArrayDesign,
            format!("nested pattern needs N1 >= 1 and N2 >= 1 (got N1={n1}, N2={n2})"),
        ));
    }
    let step = n1 + 1;
    let slots: Vec<usize> = (1..=n1).chain((1..=n2).map(|n| n * step)).collect();
    Ok(EmissionPattern::new(
        n2 * step,
        slots,
        Family::Nested,
        PatternParams::Pair { n1, n2 },
    ))
}

/// K-level nested pattern: level 1 is `{1..N_1}`, level `i` holds multiples
/// of `prod_{j<i}(N_j + 1)` up to `N_i` times that spacing.
pub fn build_klevel(params: &KLevelParams) -> EmissionPattern {
    let mut slots = Vec::with_capacity(params.transmissions());
    let mut spacing = 1usize;
    for &n in params.levels() {
        slots.extend((1..=n).map(|k| k * spacing));
        spacing *= n + 1;
    }
    slots.sort_unstable();
    slots.dedup();
    EmissionPattern::new(
        params.window_size(),
        slots,
        Family::KLevel,
        PatternParams::Levels {
            levels: params.levels().to_vec(),
        },
    )
}

/// Second-order super-nested pattern built from six uniform segments.
///
/// Requires `N1 >= 4`, `N2 >= 3`. Has the same window `P = N2(N1+1)`, the
/// same emission count and the same set of lags as `build_nested(N1, N2)`,
/// but only one pair of emissions one slot apart.
pub fn build_super_nested(n1: usize, n2: usize) -> Result<EmissionPattern> {
    if n1 < 4 || n2 < 3 {
        return Err(Error::precondition(
            Module::ArrayDesign,
            format!("super-nested pattern needs N1 >= 4 and N2 >= 3 (got N1={n1}, N2={n2})"),
        ));
    }
    let r = (n1 / 4) as i64;
    // (A1, B1, A2, B2); a negative count leaves that segment empty.
    let (a1, b1, a2, b2) = match n1 % 4 {
        0 => (r, r - 1, r - 1, r - 2),
        1 => (r, r - 1, r - 1, r - 1),
        2 => (r + 1, r, r - 1, r - 2),
        _ => (r, r, r, r - 1),
    };
    let base = (n1 + 1) as i64;
    let p = n2 * (n1 + 1);
    let mut slots: Vec<i64> = Vec::with_capacity(n1 + n2);
    slots.extend((0..=a1).map(|l| 1 + 2 * l));
    slots.extend((0..=b1).map(|l| base - (1 + 2 * l)));
    slots.extend((0..=a2).map(|l| base + (2 + 2 * l)));
    slots.extend((0..=b2).map(|l| 2 * base - (2 + 2 * l)));
    slots.extend((2..=n2 as i64).map(|l| l * base));
    slots.push(p as i64 - 1);
    slots.sort_unstable();
    slots.dedup();
    let slots: Vec<usize> = slots.into_iter().map(|s| s as usize).collect();
    debug_assert_eq!(slots.len(), n1 + n2);
    Ok(EmissionPattern::new(
        p,
        slots,
        Family::SuperNested,
        PatternParams::Pair { n1, n2 },
    ))
}

/// Co-prime pattern `{n1*N2 : n1 < 2N1} ∪ {n2*N1 : n2 < N2}`, shifted to
/// 1-based slots. The window is `P = N1*N2 + 1`, the largest lag range the
/// pattern fills contiguously; emissions extend past it up to slot
/// `(2N1 - 1)N2 + 1`.
pub fn build_coprime(n1: usize, n2: usize) -> Result<EmissionPattern> {
    if n1 == 0 || n1 >= n2 || gcd(n1, n2) != 1 {
        return Err(Error::precondition(
            Module::ArrayDesign,
            format!(
                "co-prime pattern needs 1 <= N1 < N2 with gcd(N1, N2) = 1 (got N1={n1}, N2={n2})"
            ),
        ));
    }
    let mut slots: Vec<usize> = (0..2 * n1)
        .map(|k| k * n2)
        .chain((0..n2).map(|k| k * n1))
        .map(|s| s + 1)
        .collect();
    slots.sort_unstable();
    slots.dedup();
    Ok(EmissionPattern::new(
        n1 * n2 + 1,
        slots,
        Family::Coprime,
        PatternParams::Pair { n1, n2 },
    ))
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
