//! Shape verdicts for a p-value plot.
//!
//! Rules, in order: MostlySignificant if frac_sig >= mostly_significant;
//! Uniform45 if frac_sig <= uniform_max_sig; BilinearMixture if the blade
//! (p <= blade_p) holds at least min_blade of the points and at least
//! min_null lie above .05; otherwise Indeterminate.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ks::{ks_uniformity, KS_MIN_N};
use super::PValueSeries;
use crate::error::{AuditError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Uniform45,
    MostlySignificant,
    BilinearMixture,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Uniform45 => "Uniform45",
            Verdict::MostlySignificant => "MostlySignificant",
            Verdict::BilinearMixture => "BilinearMixture",
            Verdict::Indeterminate => "Indeterminate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierThresholds {
    pub mostly_significant: f64,
    pub uniform_max_sig: f64,
    pub blade_p: f64,
    pub min_blade: f64,
    pub min_null: f64,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        ClassifierThresholds {
            mostly_significant: 0.8,
            uniform_max_sig: 0.125,
            blade_p: 0.01,
            min_blade: 0.05,
            min_null: 0.3,
        }
    }
}

impl ClassifierThresholds {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mostly_significant", self.mostly_significant),
            ("uniform_max_sig", self.uniform_max_sig),
            ("blade_p", self.blade_p),
            ("min_blade", self.min_blade),
            ("min_null", self.min_null),
        ];
        for (name, v) in fields {
            if !(0.0..=1.0).contains(&v) {
                return Err(AuditError::InvalidArgument(format!(
                    "threshold {name} = {v} outside [0, 1]"
                )));
            }
        }
        if self.uniform_max_sig >= self.mostly_significant {
            return Err(AuditError::InvalidArgument(
                "uniform_max_sig must be below mostly_significant".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotClassification {
    pub verdict: Verdict,
    /// Share of points with p <= .05.
    pub frac_sig: f64,
    /// Share with p <= .001.
    pub frac_tiny: f64,
    /// Share with p <= the blade cut point.
    pub frac_blade: f64,
    pub frac_null: f64,
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
}

pub fn classify(series: &PValueSeries) -> Result<PlotClassification> {
    classify_with(series, &ClassifierThresholds::default())
}

pub fn classify_with(
    series: &PValueSeries,
    t: &ClassifierThresholds,
) -> Result<PlotClassification> {
    t.validate()?;
    let n = series.len();
    if n < KS_MIN_N {
        return Err(AuditError::InsufficientData {
            needed: KS_MIN_N,
            got: n,
        });
    }
    let share =
        |cut: f64| series.entries.iter().filter(|e| e.p_clamped <= cut).count() as f64 / n as f64;
    let frac_sig = share(0.05);
    let frac_tiny = share(0.001);
    let frac_blade = share(t.blade_p);
    let frac_null = 1.0 - frac_sig;
    let ks = ks_uniformity(series)?;

    let verdict = if frac_sig >= t.mostly_significant {
        Verdict::MostlySignificant
    } else if frac_sig <= t.uniform_max_sig {
        Verdict::Uniform45
    } else if frac_blade >= t.min_blade && frac_null >= t.min_null {
        Verdict::BilinearMixture
    } else {
        Verdict::Indeterminate
    };
    Ok(PlotClassification {
        verdict,
        frac_sig,
        frac_tiny,
        frac_blade,
        frac_null,
        ks_statistic: ks.statistic,
        ks_pvalue: ks.p_value,
    })
}
