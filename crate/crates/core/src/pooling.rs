//! Inverse-variance pooling of log risk ratios.
//!
//! Per-study standard errors come from the log-scale interval. The fixed-effect
//! estimate uses w = 1/se²; DerSimonian–Laird adds the moment estimate of τ²
//! to every variance.

use serde::{Deserialize, Serialize};

use crate::dataset::PollutantDataset;
use crate::error::{AuditError, Result};
use crate::stats::Z_95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    FixedEffect,
    DerSimonianLaird,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolResult {
    pub method: Method,
    pub n_studies: usize,
    pub pooled_log_rr: f64,
    pub pooled_se: f64,
    pub pooled_rr: f64,
    pub ci95: (f64, f64),
    pub q_statistic: f64,
    pub tau_squared: f64,
    pub i_squared_pct: f64,
}

/// I² as a percentage, truncated at zero.
pub fn i_squared(q: f64, df: usize) -> Result<f64> {
    if df < 1 {
        return Err(AuditError::InvalidArgument("I² needs df >= 1".into()));
    }
    if q.is_nan() || q < 0.0 || !q.is_finite() {
        return Err(AuditError::InvalidArgument(format!(
            "Q must be a finite nonnegative number, got {q}"
        )));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    Ok(((q - df as f64) / q).max(0.0) * 100.0)
}

/// Pools `(log_rr, se)` pairs directly.
pub fn pool_log(effects: &[(f64, f64)], method: Method) -> Result<PoolResult> {
    let n = effects.len();
    if n < 2 {
        return Err(AuditError::InsufficientData { needed: 2, got: n });
    }
    for &(y, se) in effects {
        if !y.is_finite() || se.is_nan() || se <= 0.0 || !se.is_finite() {
            return Err(AuditError::InvalidArgument(format!(
                "bad study effect ({y}, {se})"
            )));
        }
    }
    let w: Vec<f64> = effects.iter().map(|&(_, se)| 1.0 / (se * se)).collect();
    let sw: f64 = w.iter().sum();
    let fixed = effects
        .iter()
        .zip(&w)
        .map(|(&(y, _), wi)| wi * y)
        .sum::<f64>()
        / sw;
    let q: f64 = effects
        .iter()
        .zip(&w)
        .map(|(&(y, _), wi)| wi * (y - fixed).powi(2))
        .sum();
    let df = n - 1;

    let (estimate, se, tau2) = match method {
        Method::FixedEffect => (fixed, (1.0 / sw).sqrt(), 0.0),
        Method::DerSimonianLaird => {
            let sw2: f64 = w.iter().map(|x| x * x).sum();
            let denom = sw - sw2 / sw;
            let tau2 = if denom > 0.0 {
                ((q - df as f64) / denom).max(0.0)
            } else {
                0.0
            };
            if tau2 == 0.0 {
                (fixed, (1.0 / sw).sqrt(), 0.0)
            } else {
                let ws: Vec<f64> = effects
                    .iter()
                    .map(|&(_, se)| 1.0 / (se * se + tau2))
                    .collect();
                let sws: f64 = ws.iter().sum();
                let est = effects
                    .iter()
                    .zip(&ws)
                    .map(|(&(y, _), wi)| wi * y)
                    .sum::<f64>()
                    / sws;
                (est, (1.0 / sws).sqrt(), tau2)
            }
        }
    };
    Ok(PoolResult {
        method,
        n_studies: n,
        pooled_log_rr: estimate,
        pooled_se: se,
        pooled_rr: estimate.exp(),
        ci95: ((estimate - Z_95 * se).exp(), (estimate + Z_95 * se).exp()),
        q_statistic: q,
        tau_squared: tau2,
        i_squared_pct: i_squared(q, df)?,
    })
}

pub fn pool(dataset: &PollutantDataset, method: Method) -> Result<PoolResult> {
    let effects = dataset
        .records()
        .iter()
        .map(|r| r.log_se().map(|se| (r.log_rr(), se)))
        .collect::<Result<Vec<_>>>()?;
    pool_log(&effects, method)
}
