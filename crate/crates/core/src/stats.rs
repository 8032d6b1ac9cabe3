//! Scalar statistical kernels.
//!
//! Standard normal distribution functions and the Altman–Bland recovery of a
//! two-sided p-value from a ratio-scale estimate and its confidence interval:
//!
//! ```text
//! SE = (ln ucl - ln lcl) / (2 z_c)
//! z  = |ln rr| / SE
//! p  = exp(-0.717 z - 0.416 z^2)
//! ```
//!
//! Values below [`P_FLOOR`] are reported as the floor, with the raw value kept
//! alongside.

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

/// Smallest p-value the approximation is trusted to report.
pub const P_FLOOR: f64 = 1e-4;

/// Two-sided critical value used for 95% intervals.
pub const Z_95: f64 = 1.96;

/// A p-value recovered from a confidence interval, kept both raw and floored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub raw: f64,
    pub clamped: f64,
    pub was_clamped: bool,
}

impl PValue {
    pub fn from_raw(raw: f64) -> Self {
        PValue {
            raw,
            clamped: raw.max(P_FLOOR),
            was_clamped: raw < P_FLOOR,
        }
    }
}

fn require_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(AuditError::InvalidArgument(format!(
            "{name} must be finite, got {x}"
        )))
    }
}

/// Standard normal CDF, Φ(z).
pub fn std_normal_cdf(z: f64) -> Result<f64> {
    require_finite("z", z)?;
    Ok(0.5 * libm::erfc(-z / std::f64::consts::SQRT_2))
}

/// Upper tail 1 - Φ(z), computed without cancellation.
pub fn std_normal_sf(z: f64) -> Result<f64> {
    require_finite("z", z)?;
    Ok(0.5 * libm::erfc(z / std::f64::consts::SQRT_2))
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation (relative error about 1.15e-9) followed by
/// one Halley step against the erfc-based CDF, which brings the result to
/// near machine precision.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(AuditError::InvalidArgument(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }

    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement; the error term uses the tail that avoids cancellation.
    let err = if x < 0.0 {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2) - p
    } else {
        (1.0 - p) - 0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    };
    let u = err * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    Ok(x - u / (1.0 + x * u / 2.0))
}

/// Two-sided critical value for a confidence level. Exactly 1.96 at 0.95.
pub fn critical_value(conf_level: f64) -> Result<f64> {
    if !(conf_level > 0.0 && conf_level < 1.0) {
        return Err(AuditError::InvalidArgument(format!(
            "confidence level must lie in (0, 1), got {conf_level}"
        )));
    }
    if conf_level == 0.95 {
        return Ok(Z_95);
    }
    std_normal_quantile(1.0 - (1.0 - conf_level) / 2.0)
}

/// The Altman–Bland approximation to a two-sided p-value for a z statistic.
///
/// Never returns 0: beyond z of about 41 the value is held at the smallest
/// positive normal double instead of underflowing.
pub fn altman_bland_p(z: f64) -> f64 {
    let z = z.abs();
    (-0.717 * z - 0.416 * z * z).exp().max(f64::MIN_POSITIVE)
}

/// Standard error of the log ratio implied by a confidence interval.
pub fn log_se_from_ci(lcl: f64, ucl: f64, conf_level: f64) -> Result<f64> {
    for (name, v) in [("lcl", lcl), ("ucl", ucl), ("conf_level", conf_level)] {
        require_finite(name, v)?;
    }
    if lcl <= 0.0 {
        return Err(AuditError::RatioDomain {
            name: "lcl",
            value: lcl,
        });
    }
    if ucl <= 0.0 {
        return Err(AuditError::RatioDomain {
            name: "ucl",
            value: ucl,
        });
    }
    if lcl >= ucl {
        return Err(AuditError::DegenerateInterval { lcl, ucl });
    }
    let zc = critical_value(conf_level)?;
    Ok((ucl.ln() - lcl.ln()) / (2.0 * zc))
}

/// z statistic for a ratio estimate and its interval.
pub fn z_from_ratio_ci(rr: f64, lcl: f64, ucl: f64, conf_level: f64) -> Result<f64> {
    require_finite("rr", rr)?;
    if rr <= 0.0 {
        return Err(AuditError::RatioDomain {
            name: "rr",
            value: rr,
        });
    }
    let se = log_se_from_ci(lcl, ucl, conf_level)?;
    Ok(rr.ln().abs() / se)
}

/// Two-sided p-value for a ratio estimate recovered from its confidence interval.
pub fn p_from_ratio_ci(rr: f64, lcl: f64, ucl: f64, conf_level: f64) -> Result<PValue> {
    let z = z_from_ratio_ci(rr, lcl, ucl, conf_level)?;
    Ok(PValue::from_raw(altman_bland_p(z)))
}
