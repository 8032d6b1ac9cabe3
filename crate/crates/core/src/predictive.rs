//! Post-study probability that a reported finding is true, under bias.
//!
//! For `c` relationships probed with pre-study probability (prevalence) `P`,
//! error rates `α`, `β` and bias `u` (the share of would-be null results that
//! end up reported as findings), the expected 2×2 counts are
//!
//! ```text
//! TP = c(1-β)P + u·c·β·P          FN = c·β·P·(1-u)
//! FP = c·α(1-P) + u·c(1-α)(1-P)   TN = c(1-α)(1-P)(1-u)
//! ```
//!
//! and PPV = TP/(TP+FP), NPV = TN/(TN+FN). The `(1-u)` factor cancels in NPV.

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveParams {
    pub alpha: f64,
    pub beta: f64,
    pub prevalence: f64,
    pub bias: f64,
    /// Number of relationships probed.
    pub c: f64,
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(AuditError::InvalidArgument(format!(
            "{name} must lie in (0, 1), got {v}"
        )))
    }
}

impl PredictiveParams {
    pub fn new(alpha: f64, beta: f64, prevalence: f64, bias: f64) -> Result<Self> {
        Self::with_count(alpha, beta, prevalence, bias, 1.0)
    }

    pub fn with_count(alpha: f64, beta: f64, prevalence: f64, bias: f64, c: f64) -> Result<Self> {
        let p = PredictiveParams {
            alpha,
            beta,
            prevalence,
            bias,
            c,
        };
        p.validate()?;
        Ok(p)
    }

    /// Scenario stated in terms of power rather than β.
    pub fn from_power(alpha: f64, power: f64, prevalence: f64, bias: f64) -> Result<Self> {
        open_unit("power", power)?;
        Self::new(alpha, 1.0 - power, prevalence, bias)
    }

    pub fn validate(&self) -> Result<()> {
        open_unit("alpha", self.alpha)?;
        open_unit("beta", self.beta)?;
        open_unit("prevalence", self.prevalence)?;
        if !(self.bias >= 0.0 && self.bias < 1.0) {
            return Err(AuditError::InvalidArgument(format!(
                "bias must lie in [0, 1), got {}",
                self.bias
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(AuditError::InvalidArgument(format!(
                "c must be positive, got {}",
                self.c
            )));
        }
        Ok(())
    }
}

/// Expected (real-valued) cell counts of the 2×2 table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContingencyCounts {
    pub tp: f64,
    pub fn_: f64,
    pub tn: f64,
    pub fp: f64,
}

pub fn contingency_with_bias(params: &PredictiveParams) -> Result<ContingencyCounts> {
    params.validate()?;
    let PredictiveParams {
        alpha,
        beta,
        prevalence: p,
        bias: u,
        c,
    } = *params;
    Ok(ContingencyCounts {
        tp: c * (1.0 - beta) * p + u * c * beta * p,
        fn_: c * beta * p * (1.0 - u),
        tn: c * (1.0 - alpha) * (1.0 - p) * (1.0 - u),
        fp: c * alpha * (1.0 - p) + u * c * (1.0 - alpha) * (1.0 - p),
    })
}

pub fn ppv(params: &PredictiveParams) -> Result<f64> {
    params.validate()?;
    let PredictiveParams {
        alpha,
        beta,
        prevalence: p,
        bias: u,
        ..
    } = *params;
    let true_pos = (1.0 - beta) * p + u * beta * p;
    let false_pos = alpha * (1.0 - p) + u * (1.0 - alpha) * (1.0 - p);
    Ok(true_pos / (true_pos + false_pos))
}

/// NPV. `bias == 1` leaves no reported nulls at all (0/0).
pub fn npv(params: &PredictiveParams) -> Result<f64> {
    if params.bias == 1.0 {
        return Err(AuditError::Indeterminate("NPV is 0/0 when bias = 1".into()));
    }
    params.validate()?;
    let PredictiveParams {
        alpha,
        beta,
        prevalence: p,
        bias: u,
        ..
    } = *params;
    let true_neg = (1.0 - alpha) * (1.0 - p) * (1.0 - u);
    let false_neg = beta * p * (1.0 - u);
    Ok(true_neg / (false_neg + true_neg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub prevalence: f64,
    pub bias: f64,
    pub ppv: f64,
    pub npv: f64,
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi < 1.0 && lo <= hi) {
        return Err(AuditError::InvalidArgument(format!(
            "grid bounds must satisfy 0 < lo <= hi < 1, got [{lo}, {hi}]"
        )));
    }
    if n == 0 {
        return Err(AuditError::EmptyInput(
            "grid needs at least one point".into(),
        ));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// One row per (prevalence, bias) pair, prevalence-major.
pub fn predictive_curve(
    alpha: f64,
    beta: f64,
    bias_levels: &[f64],
    prevalences: &[f64],
) -> Result<Vec<CurveRow>> {
    if prevalences.is_empty() {
        return Err(AuditError::EmptyInput("prevalence grid is empty".into()));
    }
    if bias_levels.is_empty() {
        return Err(AuditError::EmptyInput("no bias levels given".into()));
    }
    let mut rows = Vec::with_capacity(prevalences.len() * bias_levels.len());
    for &prevalence in prevalences {
        for &bias in bias_levels {
            let params = PredictiveParams::new(alpha, beta, prevalence, bias)?;
            rows.push(CurveRow {
                prevalence,
                bias,
                ppv: ppv(&params)?,
                npv: npv(&params)?,
            });
        }
    }
    Ok(rows)
}
