//! Rank-ordered p-value series, significance counts, shape classification
//! and plot rendering.

mod classify;
mod ks;
mod render;

pub use classify::{classify, classify_with, ClassifierThresholds, PlotClassification, Verdict};
pub use ks::{kolmogorov_sf, ks_uniformity, KsResult};
pub use render::{render_svg, write_plot_csv, RenderOptions};

use serde::{Deserialize, Serialize};

use crate::dataset::PollutantDataset;
use crate::error::{AuditError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub rank: usize,
    pub p_raw: f64,
    pub p_clamped: f64,
    pub study_id: String,
}

/// p-values sorted ascending, ranked from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueSeries {
    pub source_label: String,
    pub entries: Vec<SeriesEntry>,
}

impl PValueSeries {
    /// Sorts `(study_id, p_raw)` pairs by p then study_id and assigns ranks.
    pub fn from_values(
        source_label: impl Into<String>,
        values: Vec<(String, f64)>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(AuditError::EmptyInput(
                "p-value series has no entries".into(),
            ));
        }
        let mut values = values;
        for (id, p) in &values {
            if !(0.0..=1.0).contains(p) {
                return Err(AuditError::InvalidArgument(format!(
                    "`{id}`: p-value {p} outside [0, 1]"
                )));
            }
        }
        values.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        let entries = values
            .into_iter()
            .enumerate()
            .map(|(i, (study_id, p_raw))| SeriesEntry {
                rank: i + 1,
                p_raw,
                p_clamped: crate::stats::PValue::from_raw(p_raw).clamped,
                study_id,
            })
            .collect();
        Ok(PValueSeries {
            source_label: source_label.into(),
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn raw(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.p_raw).collect()
    }

    pub fn clamped(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.p_clamped).collect()
    }
}

pub fn build_series(dataset: &PollutantDataset) -> Result<PValueSeries> {
    let values = dataset
        .records()
        .iter()
        .map(|r| r.p_value().map(|p| (r.study_id.clone(), p.raw)))
        .collect::<Result<Vec<_>>>()?;
    PValueSeries::from_values(dataset.label(), values)
}

/// Counts at the .05 and .001 cut points, inclusive, on clamped p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignificanceCounts {
    pub n: usize,
    pub n_gt_05: usize,
    pub n_le_05: usize,
    pub n_le_001: usize,
}

pub fn significance_counts(series: &PValueSeries) -> SignificanceCounts {
    let n = series.len();
    let n_le_05 = series
        .entries
        .iter()
        .filter(|e| e.p_clamped <= 0.05)
        .count();
    let n_le_001 = series
        .entries
        .iter()
        .filter(|e| e.p_clamped <= 0.001)
        .count();
    SignificanceCounts {
        n,
        n_gt_05: n - n_le_05,
        n_le_05,
        n_le_001,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::EffectRecord;
    use crate::fixtures::Fixture;

    #[test]
    fn pm25_series() {
        let s = build_series(&Fixture::ZhengPm25.load().unwrap()).unwrap();
        assert_eq!(s.len(), 37);
        assert_eq!(s.entries[0].p_clamped, 1e-4);
        assert!(s.entries.iter().enumerate().all(|(i, e)| e.rank == i + 1));
        assert!(s
            .entries
            .windows(2)
            .all(|w| w[0].p_clamped <= w[1].p_clamped));
    }

    #[test]
    fn single_null_record() {
        let ds =
            PollutantDataset::new("one", vec![EffectRecord::new("a", 1.0, 0.8, 1.25).unwrap()])
                .unwrap();
        let s = build_series(&ds).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s.entries[0].rank, s.entries[0].p_clamped), (1, 1.0));
        assert_eq!(
            significance_counts(&s),
            SignificanceCounts {
                n: 1,
                n_gt_05: 1,
                n_le_05: 0,
                n_le_001: 0
            }
        );
    }

    #[test]
    fn cml_all_above_05() {
        let s = build_series(&Fixture::SchnatterCml.load().unwrap()).unwrap();
        assert_eq!(s.len(), 12);
        assert!(s.entries.iter().all(|e| e.p_clamped > 0.05));
    }

    #[test]
    fn ties_break_on_study_id() {
        let s = PValueSeries::from_values(
            "t",
            vec![("b".into(), 0.5), ("a".into(), 0.5), ("c".into(), 0.1)],
        )
        .unwrap();
        let ids: Vec<&str> = s.entries.iter().map(|e| e.study_id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }

    #[test]
    fn counts_boundaries_inclusive() {
        let s = PValueSeries::from_values(
            "t",
            vec![
                ("a".into(), 0.05),
                ("b".into(), 0.001),
                ("c".into(), 0.0501),
                ("d".into(), 0.00001),
            ],
        )
        .unwrap();
        assert_eq!(
            significance_counts(&s),
            SignificanceCounts {
                n: 4,
                n_gt_05: 1,
                n_le_05: 3,
                n_le_001: 2
            }
        );
    }

    #[test]
    fn pm25_counts() {
        let c = significance_counts(&build_series(&Fixture::ZhengPm25.load().unwrap()).unwrap());
        assert_eq!(c.n, 37);
        assert!(c.n_gt_05 == 22 || c.n_gt_05 == 23);
        assert_eq!(c.n_le_001, 8);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PValueSeries::from_values("t", vec![]).is_err());
        assert!(PValueSeries::from_values("t", vec![("a".into(), 1.5)]).is_err());
        assert!(PValueSeries::from_values("t", vec![("a".into(), f64::NAN)]).is_err());
    }
}
