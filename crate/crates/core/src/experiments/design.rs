use std::collections::BTreeMap;

use serde::Serialize;

use super::config::PatternSpec;
use crate::array_design::{
    missing_lags, optimal_nested, EmissionPattern, Family, NestedPreference,
};
use crate::error::Result;

/// Summary of a pattern for a given window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    #[serde(rename = "P")]
    pub p: usize,
    pub family: Family,
    pub pattern: serde_json::Value,
    pub transmissions: usize,
    /// Percentage of the window's pulses not transmitted.
    pub savings_percent: f64,
    pub gap_count: usize,
    /// Gap size to number of gaps of that size.
    pub gap_sizes: BTreeMap<usize, usize>,
    pub contiguous_coarray: bool,
    pub missing_lags: Vec<i64>,
    /// Both minimal nested designs `(N1, N2)`, when the family is nested.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub nested_optima: Vec<(usize, usize)>,
}

pub fn design_report(p: usize, spec: &PatternSpec) -> Result<DesignReport> {
    let pattern = spec.build(p)?;
    Ok(report_for(&pattern, spec.family))
}

fn report_for(pattern: &EmissionPattern, family: Family) -> DesignReport {
    let p = pattern.window_size();
    let gaps = pattern.gaps();
    let mut gap_sizes = BTreeMap::new();
    for g in &gaps {
        *gap_sizes.entry(*g).or_insert(0) += 1;
    }
    let missing = missing_lags(pattern);
    let nested_optima = if matches!(family, Family::Nested | Family::SuperNested) && p >= 2 {
        let mut v = Vec::new();
        for pref in [
            NestedPreference::FewerLargerGaps,
            NestedPreference::MoreSmallerGaps,
        ] {
            if let Ok(o) = optimal_nested(p, pref) {
                if !v.contains(&o) {
                    v.push(o);
                }
            }
        }
        v
    } else {
        Vec::new()
    };
    DesignReport {
        p,
        family,
        pattern: pattern.to_json(),
        transmissions: pattern.len(),
        savings_percent: 100.0 * pattern.savings(),
        gap_count: gaps.len(),
        gap_sizes,
        contiguous_coarray: missing.is_empty(),
        missing_lags: missing,
        nested_optima,
    }
}

impl DesignReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// `key,value` lines.
    pub fn to_csv(&self) -> String {
        let slots: Vec<String> = self.pattern["slots"]
            .as_array()
            .map(|a| a.iter().map(|v| v.to_string()).collect())
            .unwrap_or_default();
        let gaps: Vec<String> = self
            .gap_sizes
            .iter()
            .map(|(s, n)| format!("{n}x{s}"))
            .collect();
        let optima: Vec<String> = self
            .nested_optima
            .iter()
            .map(|(a, b)| format!("{a}/{b}"))
            .collect();
        format!(
            "key,value\nP,{}\nfamily,{}\ntransmissions,{}\nsavings_percent,{:.1}\ngap_count,{}\ngaps,{}\ncontiguous_coarray,{}\nnested_optima,{}\nslots,{}\n",
            self.p,
            self.family.as_str(),
            self.transmissions,
            self.savings_percent,
            self.gap_count,
            gaps.join(" "),
            self.contiguous_coarray,
            optima.join(" "),
            slots.join(" "),
        )
    }
}
