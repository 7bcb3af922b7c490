//! Closed-form minimal-transmission designs.

use serde::{Deserialize, Serialize};

use super::KLevelParams;
use crate::error::{Error, Module, Result};

/// Which of the two minimal nested designs to return when they differ.
///
/// A nested pattern leaves `N2 - 1` idle gaps of `N1` slots each, usable
/// for interleaved B-mode transmissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NestedPreference {
    /// `N1 = min(D2) - 1`, `N2 = max(D1)`.
    #[default]
    FewerLargerGaps,
    /// `N1 = max(D1) - 1`, `N2 = min(D2)`.
    MoreSmallerGaps,
}

/// Sorted divisors of `p` by trial division up to `sqrt(p)`.
pub fn divisors(p: usize) -> Vec<usize> {
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut d = 1;
    while d * d <= p {
        if p.is_multiple_of(d) {
            low.push(d);
            if d * d != p {
                high.push(p / d);
            }
        }
        d += 1;
    }
    low.extend(high.into_iter().rev());
    low
}

/// Prime factorization as `(prime, multiplicity)` with primes ascending.
pub fn prime_factors(mut p: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= p {
        if p.is_multiple_of(f) {
            let mut q = 0;
            while p.is_multiple_of(f) {
                p /= f;
                q += 1;
            }
            out.push((f, q));
        }
        f += 1;
    }
    if p > 1 {
        out.push((p, 1));
    }
    out
}

/// `(N1, N2)` minimising `N1 + N2` subject to `N2 (N1 + 1) = P`.
///
/// With `D1` the divisors of `P` not above `sqrt(P)` and `D2` those not
/// below, the two optima pair `max(D1)` with `min(D2)`; `preference` picks
/// which of them becomes `N1 + 1`. A prime `P` only admits `(P - 1, 1)`.
pub fn optimal_nested(p: usize, preference: NestedPreference) -> Result<(usize, usize)> {
    if p < 2 {
        return Err(Error::precondition(
            Module::ArrayDesign,
            format!("optimal nested design needs P >= 2 (got P={p})"),
        ));
    }
    let divs = divisors(p);
    // max(D1) is the largest divisor with d*d <= P, min(D2) its cofactor.
    let small = *divs
        .iter()
        .filter(|&&d| d * d <= p)
        .max()
        .expect("1 divides P");
    let large = p / small;
    if small == 1 {
        return Ok((p - 1, 1));
    }
    Ok(match preference {
        NestedPreference::FewerLargerGaps => (large - 1, small),
        NestedPreference::MoreSmallerGaps => (small - 1, large),
    })
}

/// Minimal-transmission K-level design.
///
/// `K` equals the number of prime factors of `P` counted with
/// multiplicity. Levels are every prime factor minus one, ascending, except
/// the last which is the largest prime factor itself, giving
/// `N = 1 + sum (p_i - 1) q_i` emissions.
pub fn optimal_klevel(p: usize) -> Result<KLevelParams> {
    if p < 2 {
        return Err(Error::precondition(
            Module::ArrayDesign,
            format!("optimal k-level design needs P >= 2 (got P={p})"),
        ));
    }
    let mut primes: Vec<usize> = prime_factors(p)
        .into_iter()
        .flat_map(|(f, q)| std::iter::repeat_n(f, q))
        .collect();
    let last = primes.pop().expect("P >= 2 has a prime factor");
    let mut levels: Vec<usize> = primes.into_iter().map(|f| f - 1).collect();
    levels.push(last);
    KLevelParams::new(levels, p)
}
