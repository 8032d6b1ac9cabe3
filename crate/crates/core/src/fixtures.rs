//! Bundled reference datasets and the summary values published alongside them.
//!
//! The CSV files live in the workspace `data/` directory and are compiled in,
//! so every consumer sees byte-identical inputs. They are transcribed as
//! printed; disagreements between tables are surfaced as diagnostics.

use serde::Serialize;

use crate::dataset::{
    parse_effect_csv, parse_prevalence_csv, parse_searchspace_csv, PollutantDataset,
    PrevalenceRecord, SearchSpaceRecord,
};
use crate::error::Result;
use crate::pvplot::SignificanceCounts;

/// One bundled effect dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fixture {
    ZhengCo,
    ZhengNo2,
    ZhengO3,
    ZhengPm25,
    ZhengPm10,
    ZhengSo2,
    SchnatterCml,
    SchnatterMeso,
    BarretoExercise,
    LeeSmoking,
}

impl Fixture {
    pub const ALL: [Fixture; 10] = [
        Fixture::ZhengCo,
        Fixture::ZhengNo2,
        Fixture::ZhengO3,
        Fixture::ZhengPm25,
        Fixture::ZhengPm10,
        Fixture::ZhengSo2,
        Fixture::SchnatterCml,
        Fixture::SchnatterMeso,
        Fixture::BarretoExercise,
        Fixture::LeeSmoking,
    ];

    pub const POLLUTANTS: [Fixture; 6] = [
        Fixture::ZhengCo,
        Fixture::ZhengNo2,
        Fixture::ZhengO3,
        Fixture::ZhengPm25,
        Fixture::ZhengPm10,
        Fixture::ZhengSo2,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Fixture::ZhengCo => "zheng_co.csv",
            Fixture::ZhengNo2 => "zheng_no2.csv",
            Fixture::ZhengO3 => "zheng_o3.csv",
            Fixture::ZhengPm25 => "zheng_pm25.csv",
            Fixture::ZhengPm10 => "zheng_pm10.csv",
            Fixture::ZhengSo2 => "zheng_so2.csv",
            Fixture::SchnatterCml => "schnatter_cml.csv",
            Fixture::SchnatterMeso => "schnatter_meso.csv",
            Fixture::BarretoExercise => "barreto_exercise.csv",
            Fixture::LeeSmoking => "lee_smoking.csv",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Fixture::ZhengCo => "CO",
            Fixture::ZhengNo2 => "NO2",
            Fixture::ZhengO3 => "O3",
            Fixture::ZhengPm25 => "PM2.5",
            Fixture::ZhengPm10 => "PM10",
            Fixture::ZhengSo2 => "SO2",
            Fixture::SchnatterCml => "CML",
            Fixture::SchnatterMeso => "Mesothelioma",
            Fixture::BarretoExercise => "Exercise",
            Fixture::LeeSmoking => "Smoking-SCC",
        }
    }

    pub fn csv(self) -> &'static str {
        match self {
            Fixture::ZhengCo => include_str!("../../../data/zheng_co.csv"),
            Fixture::ZhengNo2 => include_str!("../../../data/zheng_no2.csv"),
            Fixture::ZhengO3 => include_str!("../../../data/zheng_o3.csv"),
            Fixture::ZhengPm25 => include_str!("../../../data/zheng_pm25.csv"),
            Fixture::ZhengPm10 => include_str!("../../../data/zheng_pm10.csv"),
            Fixture::ZhengSo2 => include_str!("../../../data/zheng_so2.csv"),
            Fixture::SchnatterCml => include_str!("../../../data/schnatter_cml.csv"),
            Fixture::SchnatterMeso => include_str!("../../../data/schnatter_meso.csv"),
            Fixture::BarretoExercise => include_str!("../../../data/barreto_exercise.csv"),
            Fixture::LeeSmoking => include_str!("../../../data/lee_smoking.csv"),
        }
    }

    pub fn from_file_name(name: &str) -> Option<Fixture> {
        Fixture::ALL.into_iter().find(|f| f.file_name() == name)
    }

    pub fn load(self) -> Result<PollutantDataset> {
        parse_effect_csv(self.csv().as_bytes(), self.label())?.strict()
    }
}

pub const SEARCH_SPACE_DESIGN_CSV: &str = include_str!("../../../data/search_space_design.csv");
pub const SEARCH_SPACE_PRINTED_CSV: &str = include_str!("../../../data/search_space_printed.csv");
pub const PREVALENCE_CSV: &str = include_str!("../../../data/disease_prevalence.csv");

pub fn search_space_design() -> Result<Vec<SearchSpaceRecord>> {
    parse_searchspace_csv(SEARCH_SPACE_DESIGN_CSV.as_bytes())?.strict()
}

/// Space1/Space2/Space3 exactly as printed next to the design counts.
pub fn search_space_printed() -> Vec<(String, u64, u64, u64)> {
    SEARCH_SPACE_PRINTED_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let n = |i: usize| {
                f[i].trim()
                    .parse::<u64>()
                    .expect("bundled table is numeric")
            };
            (f[0].to_string(), n(1), n(2), n(3))
        })
        .collect()
}

pub fn prevalence_table() -> Result<Vec<PrevalenceRecord>> {
    parse_prevalence_csv(PREVALENCE_CSV.as_bytes())?.strict()
}

/// A published per-pollutant significance summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PublishedCounts {
    pub label: &'static str,
    pub n: usize,
    pub n_gt_05: usize,
    pub n_le_05: usize,
    pub n_le_001: usize,
}

pub const PUBLISHED_COUNTS: [PublishedCounts; 6] = [
    PublishedCounts {
        label: "CO",
        n: 42,
        n_gt_05: 29,
        n_le_05: 13,
        n_le_001: 9,
    },
    PublishedCounts {
        label: "NO2",
        n: 66,
        n_gt_05: 30,
        n_le_05: 36,
        n_le_001: 16,
    },
    PublishedCounts {
        label: "O3",
        n: 71,
        n_gt_05: 40,
        n_le_05: 31,
        n_le_001: 11,
    },
    PublishedCounts {
        label: "PM2.5",
        n: 37,
        n_gt_05: 23,
        n_le_05: 14,
        n_le_001: 8,
    },
    PublishedCounts {
        label: "PM10",
        n: 51,
        n_gt_05: 28,
        n_le_05: 23,
        n_le_001: 6,
    },
    PublishedCounts {
        label: "SO2",
        n: 65,
        n_gt_05: 46,
        n_le_05: 19,
        n_le_001: 6,
    },
];

pub fn published_counts(label: &str) -> Option<PublishedCounts> {
    PUBLISHED_COUNTS.iter().copied().find(|c| c.label == label)
}

/// Differences between computed counts and the published row, one note per cell.
pub fn count_discrepancies(label: &str, computed: &SignificanceCounts) -> Vec<String> {
    let Some(p) = published_counts(label) else {
        return Vec::new();
    };
    let cells = [
        ("n", p.n, computed.n),
        (">.05", p.n_gt_05, computed.n_gt_05),
        ("<=.05", p.n_le_05, computed.n_le_05),
        ("<=.001", p.n_le_001, computed.n_le_001),
    ];
    cells
        .iter()
        .filter(|(_, published, got)| published != got)
        .map(|(cell, published, got)| {
            if *cell == "n" {
                format!("{label}: record count {got} differs from published {published}")
            } else {
                format!("{label}: {cell} count computed {got}, published {published}")
            }
        })
        .collect()
}

/// A pooled estimate and heterogeneity value reported for a pollutant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedPool {
    pub label: &'static str,
    pub rr: f64,
    pub lcl: f64,
    pub ucl: f64,
    pub i_squared_pct: f64,
}

pub const PUBLISHED_POOLS: [PublishedPool; 6] = [
    PublishedPool {
        label: "CO",
        rr: 1.045,
        lcl: 1.029,
        ucl: 1.061,
        i_squared_pct: 85.7,
    },
    PublishedPool {
        label: "NO2",
        rr: 1.018,
        lcl: 1.014,
        ucl: 1.022,
        i_squared_pct: 87.6,
    },
    PublishedPool {
        label: "O3",
        rr: 1.009,
        lcl: 1.006,
        ucl: 1.011,
        i_squared_pct: 87.8,
    },
    PublishedPool {
        label: "PM2.5",
        rr: 1.023,
        lcl: 1.015,
        ucl: 1.031,
        i_squared_pct: 82.8,
    },
    PublishedPool {
        label: "PM10",
        rr: 1.010,
        lcl: 1.008,
        ucl: 1.013,
        i_squared_pct: 69.1,
    },
    PublishedPool {
        label: "SO2",
        rr: 1.011,
        lcl: 1.007,
        ucl: 1.015,
        i_squared_pct: 77.1,
    },
];

pub fn published_pool(label: &str) -> Option<PublishedPool> {
    PUBLISHED_POOLS.iter().copied().find(|c| c.label == label)
}

/// Label for a data file: the fixture label when the name is a bundled
/// fixture, otherwise the file stem.
pub fn label_for_file(file_name: &str) -> String {
    match Fixture::from_file_name(file_name) {
        Some(f) => f.label().to_string(),
        None => file_name.trim_end_matches(".csv").to_string(),
    }
}
