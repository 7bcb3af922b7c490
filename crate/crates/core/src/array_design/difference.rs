use std::collections::BTreeMap;

use super::EmissionPattern;

/// Pairwise slot differences of a pattern.
///
/// `index_sets[d]` lists the positions in the column-stacked covariance
/// vector whose entry estimates lag `d`. Positions are 0-based:
/// `a + b * N` holds `R[a, b] = E[y_a conj(y_b)]`, which sits at lag
/// `slot[a] - slot[b]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceSet {
    n: usize,
    window_size: usize,
    unique_lags: Vec<i64>,
    multiplicity: BTreeMap<i64, usize>,
    index_sets: BTreeMap<i64, Vec<usize>>,
}

impl DifferenceSet {
    /// Sorted distinct lags.
    pub fn unique_lags(&self) -> &[i64] {
        &self.unique_lags
    }

    /// Number of ordered slot pairs realising `lag` (0 if absent).
    pub fn multiplicity(&self, lag: i64) -> usize {
        self.multiplicity.get(&lag).copied().unwrap_or(0)
    }

    pub fn multiplicities(&self) -> &BTreeMap<i64, usize> {
        &self.multiplicity
    }

    /// Covariance-vector positions at `lag`, empty if the lag is absent.
    pub fn index_set(&self, lag: i64) -> &[usize] {
        self.index_sets.get(&lag).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn index_sets(&self) -> &BTreeMap<i64, Vec<usize>> {
        &self.index_sets
    }

    /// Pattern length `N` the set was computed from.
    pub fn pattern_len(&self) -> usize {
        self.n
    }

    /// Window size `P` of the source pattern.
    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn contains(&self, lag: i64) -> bool {
        self.multiplicity.contains_key(&lag)
    }

    /// Lags in `[-max_lag, max_lag]` that no pair realises.
    pub fn missing_in(&self, max_lag: i64) -> Vec<i64> {
        (-max_lag..=max_lag)
            .filter(|l| !self.contains(*l))
            .collect()
    }
}

pub fn difference_set(pattern: &EmissionPattern) -> DifferenceSet {
    let slots = pattern.slots();
    let n = slots.len();
    let mut index_sets: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for b in 0..n {
        for a in 0..n {
            let lag = slots[a] as i64 - slots[b] as i64;
            index_sets.entry(lag).or_default().push(a + b * n);
        }
    }
    let multiplicity = index_sets.iter().map(|(&l, v)| (l, v.len())).collect();
    DifferenceSet {
        n,
        window_size: pattern.window_size(),
        unique_lags: index_sets.keys().copied().collect(),
        multiplicity,
        index_sets,
    }
}

/// Lags in `[-(P-1), P-1]` missing from the pattern's difference set.
pub fn missing_lags(pattern: &EmissionPattern) -> Vec<i64> {
    difference_set(pattern).missing_in(pattern.window_size() as i64 - 1)
}

/// True when the difference set covers every lag in `[-(P-1), P-1]`.
///
/// Patterns confined to the window cannot produce larger lags, so for them
/// this is the same as the unique lags being exactly that range.
pub fn verify_contiguous_coarray(pattern: &EmissionPattern) -> bool {
    missing_lags(pattern).is_empty()
}
