//! Analysis search-space counting.
//!
//! Space1 is the number of questions at issue (outcomes × predictors × models
//! × lags), Space2 the number of covariate in/out combinations (2^k), and
//! Space3 = Space1 × Space2 approximates how many analyses a study could run.

use serde::{Deserialize, Serialize};

use crate::dataset::{SearchSpaceRecord, MAX_COVARIATES};
use crate::error::{AuditError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpaceResult {
    pub space1: u64,
    pub space2: u64,
    pub space3: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceField {
    Space1,
    Space2,
    Space3,
}

impl SpaceField {
    pub fn of(self, r: &SearchSpaceResult) -> u64 {
        match self {
            SpaceField::Space1 => r.space1,
            SpaceField::Space2 => r.space2,
            SpaceField::Space3 => r.space3,
        }
    }
}

/// Five-number summary plus mean. Quartiles are Tukey hinges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpaceSummary {
    pub minimum: f64,
    pub lower_quartile: f64,
    pub median: f64,
    pub upper_quartile: f64,
    pub maximum: f64,
    pub mean: f64,
}

impl SearchSpaceSummary {
    pub fn mean_rounded(&self) -> u64 {
        self.mean.round() as u64
    }
}

pub fn compute_spaces(rec: &SearchSpaceRecord) -> Result<SearchSpaceResult> {
    if rec.covariates > MAX_COVARIATES {
        return Err(AuditError::Overflow(format!(
            "`{}`: 2^{} covariate combinations",
            rec.study_id, rec.covariates
        )));
    }
    let overflow =
        || AuditError::Overflow(format!("`{}`: search space exceeds 64 bits", rec.study_id));
    for (name, v) in [
        ("outcomes", rec.outcomes),
        ("predictors", rec.predictors),
        ("models", rec.models),
        ("lags", rec.lags),
    ] {
        if v == 0 {
            return Err(AuditError::InvalidArgument(format!(
                "`{}`: {name} must be at least 1",
                rec.study_id
            )));
        }
    }
    let space1 = rec
        .outcomes
        .checked_mul(rec.predictors)
        .and_then(|x| x.checked_mul(rec.models))
        .and_then(|x| x.checked_mul(rec.lags))
        .ok_or_else(overflow)?;
    let space2 = 1u64 << rec.covariates;
    let space3 = space1.checked_mul(space2).ok_or_else(overflow)?;
    Ok(SearchSpaceResult {
        space1,
        space2,
        space3,
    })
}

fn median_sorted(v: &[u64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
    }
}

/// Summary of a list of counts. For odd n both halves include the median.
pub fn summarize_values(values: &[u64]) -> Result<SearchSpaceSummary> {
    if values.is_empty() {
        return Err(AuditError::EmptyInput(
            "no search-space values to summarize".into(),
        ));
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let n = v.len();
    let half = n.div_ceil(2);
    let mean = v.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
    Ok(SearchSpaceSummary {
        minimum: v[0] as f64,
        lower_quartile: median_sorted(&v[..half]),
        median: median_sorted(&v),
        upper_quartile: median_sorted(&v[n - half..]),
        maximum: v[n - 1] as f64,
        mean,
    })
}

pub fn summarize_spaces(
    results: &[SearchSpaceResult],
    field: SpaceField,
) -> Result<SearchSpaceSummary> {
    let values: Vec<u64> = results.iter().map(|r| field.of(r)).collect();
    summarize_values(&values)
}

/// Expected number of false positives among `space3` tests at `rate`.
///
/// Exact for independent tests; a lower bound when tests are correlated.
pub fn expected_false_positives(space3: u64, rate: f64) -> Result<f64> {
    if space3 < 1 {
        return Err(AuditError::InvalidArgument(
            "space3 must be at least 1".into(),
        ));
    }
    if !(rate > 0.0 && rate < 1.0) {
        return Err(AuditError::InvalidArgument(format!(
            "rate must lie in (0, 1), got {rate}"
        )));
    }
    Ok(space3 as f64 * rate)
}

/// Floors the bound for display, e.g. `≥ 115` or `≥ 1,152`.
pub fn format_lower_bound(value: f64) -> String {
    // Absorb representation error so 23040 * 0.05 shows as 1,152.
    let floored = (value + 1e-9).floor() as u64;
    format!("≥ {}", group_thousands(floored))
}

pub fn group_thousands(v: u64) -> String {
    let digits = v.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}
