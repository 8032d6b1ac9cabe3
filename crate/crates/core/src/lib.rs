//! Reliability audit kernels for meta-analyses of risk-ratio studies.
//!
//! Confidence intervals are converted to p-values, ranked into p-value plots
//! and classified; analysis search spaces are counted; predictive values
//! under bias are computed; effects are pooled; and synthetic datasets are
//! simulated to check the classifier.

pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod pooling;
pub mod predictive;
pub mod pvplot;
pub mod searchspace;
pub mod simulate;
pub mod stats;

pub use dataset::{
    parse_effect_csv, parse_prevalence_csv, parse_searchspace_csv, write_effect_csv, EffectRecord,
    Parsed, PollutantDataset, PrevalenceRecord, RowError, SearchSpaceRecord,
};
pub use error::{AuditError, Result};
pub use pooling::{i_squared, pool, Method, PoolResult};
pub use predictive::{
    contingency_with_bias, npv, ppv, predictive_curve, ContingencyCounts, CurveRow,
    PredictiveParams,
};
pub use pvplot::{
    build_series, classify, classify_with, ks_uniformity, significance_counts,
    ClassifierThresholds, PValueSeries, PlotClassification, SignificanceCounts, Verdict,
};
pub use searchspace::{
    compute_spaces, summarize_spaces, SearchSpaceResult, SearchSpaceSummary, SpaceField,
};
pub use simulate::{false_positive_rate, simulate_dataset, FalsePositiveRate, Scenario, SimConfig};
pub use stats::{p_from_ratio_ci, PValue};
