//! One-sample Kolmogorov–Smirnov test against Uniform(0, 1).

use serde::{Deserialize, Serialize};

use super::PValueSeries;
use crate::error::{AuditError, Result};

pub const KS_MIN_N: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution, P(K > x).
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // Jacobi theta form converges fast for small x.
        let s: f64 = (1..=20)
            .map(|k| {
                let odd = (2 * k - 1) as f64;
                (-odd * odd * std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp()
            })
            .sum();
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / x * s;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut total = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        total += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * total).clamp(0.0, 1.0)
}

/// D statistic of sorted `x` against the uniform CDF.
fn ks_statistic_sorted(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let i = i as f64;
            ((i + 1.0) / n - v).max(v - i / n)
        })
        .fold(0.0, f64::max)
}

/// Statistic on raw p-values, with the asymptotic p-value Q(√n·D).
pub fn ks_uniformity(series: &PValueSeries) -> Result<KsResult> {
    let n = series.len();
    if n < KS_MIN_N {
        return Err(AuditError::InsufficientData {
            needed: KS_MIN_N,
            got: n,
        });
    }
    let mut raw = series.raw();
    raw.sort_by(f64::total_cmp);
    let statistic = ks_statistic_sorted(&raw);
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_sf((n as f64).sqrt() * statistic),
    })
}
