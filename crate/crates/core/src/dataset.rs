//! Effect records, design counts and prevalence tables, with CSV ingestion.
//!
//! Columns are matched by header name. Effect files use
//! `study_id,first_author,pub_year,subgroup,rr,lcl,ucl` with optional
//! `conf_level` and `reported_p` columns.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::stats::{self, PValue};

/// Largest covariate count for which 2^k fits comfortably in 64-bit arithmetic.
pub const MAX_COVARIATES: u32 = 62;

/// One base-study summary statistic on the ratio scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectRecord {
    pub study_id: String,
    pub first_author: String,
    pub pub_year: Option<i32>,
    pub subgroup: Option<String>,
    pub rr: f64,
    pub lcl: f64,
    pub ucl: f64,
    pub conf_level: f64,
    /// The p-value printed in the source table, when one was transcribed.
    pub reported_p: Option<f64>,
}

impl EffectRecord {
    /// Builds a record and checks the ratio-scale invariants.
    pub fn new(study_id: impl Into<String>, rr: f64, lcl: f64, ucl: f64) -> Result<Self> {
        let rec = EffectRecord {
            study_id: study_id.into(),
            first_author: String::new(),
            pub_year: None,
            subgroup: None,
            rr,
            lcl,
            ucl,
            conf_level: 0.95,
            reported_p: None,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        stats::z_from_ratio_ci(self.rr, self.lcl, self.ucl, self.conf_level).map(|_| ())
    }

    /// The estimate lies outside its own interval. Such rows are kept, not rejected.
    pub fn inconsistent_interval(&self) -> bool {
        self.rr < self.lcl || self.rr > self.ucl
    }

    pub fn p_value(&self) -> Result<PValue> {
        stats::p_from_ratio_ci(self.rr, self.lcl, self.ucl, self.conf_level).map_err(|e| {
            AuditError::Record {
                study_id: self.study_id.clone(),
                source: Box::new(e),
            }
        })
    }

    pub fn log_rr(&self) -> f64 {
        self.rr.ln()
    }

    pub fn log_se(&self) -> Result<f64> {
        stats::log_se_from_ci(self.lcl, self.ucl, self.conf_level).map_err(|e| AuditError::Record {
            study_id: self.study_id.clone(),
            source: Box::new(e),
        })
    }

    /// Author plus bracketed subgroup, the way the source tables print it.
    pub fn display_name(&self) -> String {
        match &self.subgroup {
            Some(s) => format!("{} ({})", self.first_author, s),
            None => self.first_author.clone(),
        }
    }
}

/// A labelled, non-empty, ordered collection of effect records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollutantDataset {
    label: String,
    records: Vec<EffectRecord>,
}

impl PollutantDataset {
    pub fn new(label: impl Into<String>, records: Vec<EffectRecord>) -> Result<Self> {
        let label = label.into();
        if records.is_empty() {
            return Err(AuditError::EmptyInput(format!(
                "dataset `{label}` has no records"
            )));
        }
        Ok(PollutantDataset { label, records })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn records(&self) -> &[EffectRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn inconsistent_records(&self) -> impl Iterator<Item = &EffectRecord> {
        self.records.iter().filter(|r| r.inconsistent_interval())
    }
}

/// Outcome, predictor, model, lag and covariate counts for one study.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpaceRecord {
    pub study_id: String,
    pub outcomes: u64,
    pub predictors: u64,
    pub models: u64,
    pub lags: u64,
    pub covariates: u32,
}

impl SearchSpaceRecord {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("outcomes", self.outcomes),
            ("predictors", self.predictors),
            ("models", self.models),
            ("lags", self.lags),
        ] {
            if v < 1 {
                return Err(AuditError::InvalidArgument(format!(
                    "{name} must be at least 1"
                )));
            }
        }
        if self.covariates > MAX_COVARIATES {
            return Err(AuditError::Overflow(format!(
                "2^{} covariate combinations exceed the supported range (max {MAX_COVARIATES})",
                self.covariates
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceRecord {
    pub disease: String,
    pub prevalence: f64,
    pub population_note: String,
}

/// A row that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    /// 1-based data row index (the header is row 0).
    pub row: usize,
    pub message: String,
}

impl From<RowError> for AuditError {
    fn from(e: RowError) -> Self {
        AuditError::Row {
            row: e.row,
            message: e.message,
        }
    }
}

/// Parse result: the value built from good rows plus per-row diagnostics.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub row_errors: Vec<RowError>,
    pub warnings: Vec<String>,
}

impl<T> Parsed<T> {
    /// Fails on the first row error; warnings are dropped.
    pub fn strict(self) -> Result<T> {
        match self.row_errors.into_iter().next() {
            Some(e) => Err(e.into()),
            None => Ok(self.value),
        }
    }
}

struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord, required: &[&str]) -> Result<Self> {
        let index: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_ascii_lowercase(), i))
            .collect();
        if index.is_empty() || (index.len() == 1 && index.contains_key("")) {
            return Err(AuditError::Schema("missing header row".into()));
        }
        for col in required {
            if !index.contains_key(*col) {
                return Err(AuditError::MissingColumn((*col).to_string()));
            }
        }
        Ok(Columns { index })
    }

    fn get<'r>(&self, rec: &'r csv::StringRecord, name: &str) -> Option<&'r str> {
        self.index
            .get(name)
            .and_then(|&i| rec.get(i))
            .map(str::trim)
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn headers<R: Read>(rdr: &mut csv::Reader<R>) -> Result<csv::StringRecord> {
    let h = rdr.headers()?.clone();
    if h.is_empty() {
        return Err(AuditError::Schema("missing header row".into()));
    }
    Ok(h)
}

fn parse_f64(field: &str, value: Option<&str>) -> std::result::Result<f64, String> {
    let raw = value.unwrap_or("");
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("non-numeric {field} `{raw}`"))
}

fn non_empty(value: Option<&str>) -> Option<String> {
    value.filter(|s| !s.is_empty()).map(str::to_string)
}

fn effect_row(
    cols: &Columns,
    rec: &csv::StringRecord,
) -> std::result::Result<EffectRecord, String> {
    let study_id = non_empty(cols.get(rec, "study_id")).ok_or("missing study_id")?;
    let pub_year = match cols.get(rec, "pub_year") {
        None | Some("") => None,
        Some(y) => Some(
            y.parse::<i32>()
                .map_err(|_| format!("non-integer pub_year `{y}`"))?,
        ),
    };
    let conf_level = match cols.get(rec, "conf_level") {
        None | Some("") => 0.95,
        v => parse_f64("conf_level", v)?,
    };
    let reported_p = match cols.get(rec, "reported_p") {
        None | Some("") => None,
        v => Some(parse_f64("reported_p", v)?),
    };
    let record = EffectRecord {
        study_id,
        first_author: cols.get(rec, "first_author").unwrap_or("").to_string(),
        pub_year,
        subgroup: non_empty(cols.get(rec, "subgroup")),
        rr: parse_f64("rr", cols.get(rec, "rr"))?,
        lcl: parse_f64("lcl", cols.get(rec, "lcl"))?,
        ucl: parse_f64("ucl", cols.get(rec, "ucl"))?,
        conf_level,
        reported_p,
    };
    record.validate().map_err(|e| e.to_string())?;
    Ok(record)
}

/// Parses an effect CSV stream into a labelled dataset.
///
/// Schema problems (no header, missing required column) are fatal. Bad rows
/// become [`RowError`]s and are skipped; duplicate `study_id`/subgroup pairs
/// and estimates outside their own interval become warnings.
pub fn parse_effect_csv<R: Read>(input: R, label: &str) -> Result<Parsed<PollutantDataset>> {
    let mut rdr = reader(input);
    let h = headers(&mut rdr)?;
    let cols = Columns::new(
        &h,
        &[
            "study_id",
            "first_author",
            "pub_year",
            "subgroup",
            "rr",
            "lcl",
            "ucl",
        ],
    )?;

    let mut records = Vec::new();
    let mut row_errors = Vec::new();
    let mut warnings = Vec::new();
    let mut seen: HashMap<(String, Option<String>), usize> = HashMap::new();

    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                row_errors.push(RowError {
                    row,
                    message: e.to_string(),
                });
                continue;
            }
        };
        match effect_row(&cols, &rec) {
            Ok(r) => {
                let key = (r.study_id.clone(), r.subgroup.clone());
                if let Some(first) = seen.insert(key, row) {
                    warnings.push(format!(
                        "row {row}: duplicate study_id `{}` (first seen at row {first})",
                        r.study_id
                    ));
                }
                if r.inconsistent_interval() {
                    warnings.push(format!(
                        "row {row}: `{}` estimate {} lies outside its interval [{}, {}]",
                        r.study_id, r.rr, r.lcl, r.ucl
                    ));
                }
                records.push(r);
            }
            Err(message) => row_errors.push(RowError { row, message }),
        }
    }

    if records.is_empty() {
        return Err(match row_errors.into_iter().next() {
            Some(e) => e.into(),
            None => AuditError::EmptyInput(format!("dataset `{label}` has no records")),
        });
    }
    Ok(Parsed {
        value: PollutantDataset::new(label, records)?,
        row_errors,
        warnings,
    })
}

/// Writes a dataset in the effect CSV schema, including the optional columns.
pub fn write_effect_csv<W: Write>(dataset: &PollutantDataset, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record([
        "study_id",
        "first_author",
        "pub_year",
        "subgroup",
        "rr",
        "lcl",
        "ucl",
        "conf_level",
        "reported_p",
    ])?;
    for r in dataset.records() {
        w.write_record([
            r.study_id.clone(),
            r.first_author.clone(),
            r.pub_year.map(|y| y.to_string()).unwrap_or_default(),
            r.subgroup.clone().unwrap_or_default(),
            r.rr.to_string(),
            r.lcl.to_string(),
            r.ucl.to_string(),
            r.conf_level.to_string(),
            r.reported_p.map(|p| p.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| AuditError::Csv(e.to_string()))?;
    Ok(())
}

fn parse_count(field: &str, value: Option<&str>) -> std::result::Result<u64, String> {
    let raw = value.unwrap_or("");
    raw.parse::<u64>()
        .map_err(|_| format!("{field} must be a non-negative integer, got `{raw}`"))
}

/// Parses the `study_id,outcomes,predictors,models,lags,covariates` schema.
pub fn parse_searchspace_csv<R: Read>(input: R) -> Result<Parsed<Vec<SearchSpaceRecord>>> {
    let mut rdr = reader(input);
    let h = headers(&mut rdr)?;
    let cols = Columns::new(
        &h,
        &[
            "study_id",
            "outcomes",
            "predictors",
            "models",
            "lags",
            "covariates",
        ],
    )?;
    let mut value = Vec::new();
    let mut row_errors = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let parsed = rec.map_err(|e| e.to_string()).and_then(|rec| {
            let covariates = parse_count("covariates", cols.get(&rec, "covariates"))?;
            let r = SearchSpaceRecord {
                study_id: non_empty(cols.get(&rec, "study_id")).ok_or("missing study_id")?,
                outcomes: parse_count("outcomes", cols.get(&rec, "outcomes"))?,
                predictors: parse_count("predictors", cols.get(&rec, "predictors"))?,
                models: parse_count("models", cols.get(&rec, "models"))?,
                lags: parse_count("lags", cols.get(&rec, "lags"))?,
                covariates: u32::try_from(covariates).unwrap_or(u32::MAX),
            };
            r.validate().map_err(|e| e.to_string())?;
            Ok(r)
        });
        match parsed {
            Ok(r) => value.push(r),
            Err(message) => row_errors.push(RowError { row, message }),
        }
    }
    Ok(Parsed {
        value,
        row_errors,
        warnings: Vec::new(),
    })
}

/// Parses the `disease,prevalence,note` schema.
pub fn parse_prevalence_csv<R: Read>(input: R) -> Result<Parsed<Vec<PrevalenceRecord>>> {
    let mut rdr = reader(input);
    let h = headers(&mut rdr)?;
    let cols = Columns::new(&h, &["disease", "prevalence", "note"])?;
    let mut value = Vec::new();
    let mut row_errors = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let parsed = rec.map_err(|e| e.to_string()).and_then(|rec| {
            let prevalence = parse_f64("prevalence", cols.get(&rec, "prevalence"))?;
            if !(prevalence > 0.0 && prevalence < 1.0) {
                return Err(format!("prevalence must lie in (0, 1), got {prevalence}"));
            }
            Ok(PrevalenceRecord {
                disease: non_empty(cols.get(&rec, "disease")).ok_or("missing disease")?,
                prevalence,
                population_note: cols.get(&rec, "note").unwrap_or("").to_string(),
            })
        });
        match parsed {
            Ok(r) => value.push(r),
            Err(message) => row_errors.push(RowError { row, message }),
        }
    }
    Ok(Parsed {
        value,
        row_errors,
        warnings: Vec::new(),
    })
}
