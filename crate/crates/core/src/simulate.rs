//! Synthetic meta-analyses under null, alternative and p-hacked regimes.
//!
//! Each study draws from its own ChaCha8 stream (seed, study index), so the
//! output does not depend on how studies are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{EffectRecord, PollutantDataset};
use crate::error::{AuditError, Result};
use crate::stats::{std_normal_quantile, PValue, Z_95};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(alias = "null")]
    AllNull,
    #[serde(alias = "alt")]
    AllAlternative,
    #[serde(alias = "phacked")]
    PHackedMixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub n_studies: usize,
    /// Number of null tests a hacked study picks its best result from.
    pub tests_per_study: usize,
    pub hacked_fraction: f64,
    pub true_log_rr: f64,
    pub se_range: (f64, f64),
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            scenario: Scenario::AllNull,
            n_studies: 40,
            tests_per_study: 50,
            hacked_fraction: 0.5,
            true_log_rr: 0.0,
            se_range: (0.01, 0.15),
            seed: 42,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_studies < 5 {
            return Err(AuditError::InvalidArgument(format!(
                "n_studies must be at least 5, got {}",
                self.n_studies
            )));
        }
        if self.tests_per_study < 1 {
            return Err(AuditError::InvalidArgument(
                "tests_per_study must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.hacked_fraction) {
            return Err(AuditError::InvalidArgument(format!(
                "hacked_fraction must lie in [0, 1], got {}",
                self.hacked_fraction
            )));
        }
        if !self.true_log_rr.is_finite() {
            return Err(AuditError::InvalidArgument(
                "true_log_rr must be finite".into(),
            ));
        }
        let (lo, hi) = self.se_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(AuditError::InvalidArgument(format!(
                "se_range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    /// Effect size actually used for honest studies.
    pub fn effective_delta(&self) -> f64 {
        match self.scenario {
            Scenario::AllNull => 0.0,
            _ => self.true_log_rr,
        }
    }

    /// Number of studies that report their best of `tests_per_study` draws.
    /// The hacked studies are the first ones by index.
    pub fn hacked_count(&self) -> usize {
        match self.scenario {
            Scenario::PHackedMixture => {
                (self.n_studies as f64 * self.hacked_fraction).round() as usize
            }
            _ => 0,
        }
    }

    /// Every study has δ/se of at least 3.5.
    pub fn strong_alternative() -> Self {
        SimConfig {
            scenario: Scenario::AllAlternative,
            true_log_rr: 0.35,
            se_range: (0.01, 0.10),
            ..Default::default()
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SimConfig { seed, ..self }
    }
}

/// SplitMix64 finaliser, used to derive well-separated replicate seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn replicate_seed(base: u64, replicate: u64) -> u64 {
    splitmix64(base ^ splitmix64(replicate))
}

/// Uniform on the open interval (0, 1).
fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    std_normal_quantile(open_uniform(rng)).expect("argument lies strictly inside (0, 1)")
}

fn study_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn simulate_study(config: &SimConfig, index: usize, width: usize) -> Result<EffectRecord> {
    let mut rng = study_rng(config.seed, index);
    let (lo, hi) = config.se_range;
    let se = lo + (hi - lo) * open_uniform(&mut rng);
    let est = if index < config.hacked_count() {
        let mut best = 0.0f64;
        for _ in 0..config.tests_per_study {
            let e = se * std_normal(&mut rng);
            if e.abs() > best.abs() {
                best = e;
            }
        }
        best
    } else {
        config.effective_delta() + se * std_normal(&mut rng)
    };
    let mut rec = EffectRecord::new(
        format!("SIM-{:0width$}", index + 1),
        est.exp(),
        (est - Z_95 * se).exp(),
        (est + Z_95 * se).exp(),
    )?;
    rec.first_author = "simulated".into();
    Ok(rec)
}

pub fn simulate_dataset(config: &SimConfig) -> Result<PollutantDataset> {
    config.validate()?;
    let width = config.n_studies.to_string().len().max(5);
    let records = (0..config.n_studies)
        .into_par_iter()
        .map(|i| simulate_study(config, i, width))
        .collect::<Result<Vec<_>>>()?;
    let label = match config.scenario {
        Scenario::AllNull => "sim-null",
        Scenario::AllAlternative => "sim-alt",
        Scenario::PHackedMixture => "sim-phacked",
    };
    PollutantDataset::new(label, records)
}

/// Replicate `r` of a configuration, with its own derived seed.
pub fn simulate_replicate(config: &SimConfig, replicate: u64) -> Result<PollutantDataset> {
    simulate_dataset(&config.with_seed(replicate_seed(config.seed, replicate)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FalsePositiveRate {
    pub rate: f64,
    pub std_error: f64,
    pub n_studies: usize,
}

/// Share of simulated studies with clamped p <= .05, pooled over replicates.
pub fn false_positive_rate(config: &SimConfig, replicates: usize) -> Result<FalsePositiveRate> {
    if config.scenario == Scenario::AllAlternative {
        return Err(AuditError::InvalidArgument(
            "false-positive rate needs a null or p-hacked scenario".into(),
        ));
    }
    if replicates == 0 {
        return Err(AuditError::InvalidArgument(
            "replicates must be at least 1".into(),
        ));
    }
    config.validate()?;
    let hits = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<usize> {
            let ds = simulate_replicate(config, r)?;
            let mut k = 0;
            for rec in ds.records() {
                if rec.p_value()?.clamped <= 0.05 {
                    k += 1;
                }
            }
            Ok(k)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    let total = replicates * config.n_studies;
    let rate = hits as f64 / total as f64;
    Ok(FalsePositiveRate {
        rate,
        std_error: (rate * (1.0 - rate) / total as f64).sqrt(),
        n_studies: total,
    })
}

/// Raw Altman–Bland p-values of a simulated dataset, in study order.
pub fn raw_p_values(ds: &PollutantDataset) -> Result<Vec<f64>> {
    ds.records()
        .iter()
        .map(|r| r.p_value().map(|p: PValue| p.raw))
        .collect()
}
