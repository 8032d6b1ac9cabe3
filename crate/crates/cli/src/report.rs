//! The `report` command: every audit step over a directory of CSV files.
//!
//! Files are sorted by name and recognised by their header. Effect files are
//! analysed in parallel; results are assembled in label order so the JSON and
//! artifacts are byte-identical across runs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use audit_core::fixtures::{
    count_discrepancies, published_counts, published_pool, PublishedCounts, PublishedPool,
};
use audit_core::predictive::log_grid;
use audit_core::pvplot::{render_svg, write_plot_csv, RenderOptions};
use audit_core::{
    build_series, classify_with, npv, parse_effect_csv, parse_prevalence_csv, pool, ppv,
    significance_counts, AuditError, ClassifierThresholds, Method, PlotClassification, PoolResult,
    PredictiveParams, SearchSpaceResult, SignificanceCounts,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::ReportArgs;
use crate::commands::{curve_csv, pvalue_csv, space_rows, SpaceRow, SpaceSummaries};
use crate::{default_label, read_thresholds};

/// Largest gap between a computed and a printed p-value that still counts as agreement.
pub const REPORTED_P_TOL: f64 = 2e-3;

pub const CURVE_ALPHA: f64 = 0.05;
pub const CURVE_POWER: f64 = 0.8;
pub const CURVE_BIAS: [f64; 2] = [0.2, 0.8];

#[derive(Debug, Clone, Serialize)]
pub struct PoolComparison {
    pub published: PublishedPool,
    /// Computed minus published.
    pub rr_gap: f64,
    pub lcl_gap: f64,
    pub ucl_gap: f64,
    pub i_squared_gap: f64,
}

impl PoolComparison {
    pub fn new(published: PublishedPool, computed: &PoolResult) -> Self {
        PoolComparison {
            published,
            rr_gap: computed.pooled_rr - published.rr,
            lcl_gap: computed.ci95.0 - published.lcl,
            ucl_gap: computed.ci95.1 - published.ucl,
            i_squared_gap: computed.i_squared_pct - published.i_squared_pct,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PValueMismatch {
    pub study_id: String,
    pub name: String,
    pub computed: f64,
    pub reported: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportedPCheck {
    pub compared: usize,
    pub within_tolerance: usize,
    pub tolerance: f64,
    pub mismatches: Vec<PValueMismatch>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetReport {
    pub label: String,
    pub source_file: String,
    pub n_records: usize,
    pub counts: SignificanceCounts,
    pub published_counts: Option<PublishedCounts>,
    pub classification: Option<PlotClassification>,
    pub pool_fixed: Option<PoolResult>,
    pub pool_dl: Option<PoolResult>,
    pub pool_comparison: Option<PoolComparison>,
    pub reported_p: ReportedPCheck,
    pub plot_svg: String,
    pub plot_csv: String,
    pub pvalues_csv: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchSpaceReport {
    pub source_file: String,
    pub fp_rate: f64,
    pub rows: Vec<SpaceRow>,
    pub summary: SpaceSummaries,
    pub printed_file: Option<String>,
    /// Summary of the Space columns as printed next to the design counts.
    pub printed_summary: Option<SpaceSummaries>,
    pub printed_mismatches: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrevalencePoint {
    pub disease: String,
    pub prevalence: f64,
    pub bias: f64,
    pub ppv: f64,
    pub npv: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictiveSection {
    pub curve_csv: String,
    pub alpha: f64,
    pub power: f64,
    pub bias_levels: Vec<f64>,
    pub prevalence_points: Vec<PrevalencePoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailedInput {
    pub file: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub datasets: Vec<DatasetReport>,
    pub search_space: Option<SearchSpaceReport>,
    pub predictive: PredictiveSection,
    pub discrepancies: Vec<String>,
    pub errors: Vec<FailedInput>,
}

/// A report plus the artifact bytes it refers to, keyed by relative path.
pub struct BuiltReport {
    pub report: AuditReport,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InputKind {
    Effects,
    Design,
    PrintedSpaces,
    Prevalence,
    Unknown,
}

fn input_kind(path: &Path) -> Result<InputKind> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let header = text.lines().next().unwrap_or("").to_ascii_lowercase();
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let has = |c: &str| cols.contains(&c);
    Ok(if has("rr") && has("lcl") && has("ucl") {
        InputKind::Effects
    } else if has("outcomes") && has("covariates") {
        InputKind::Design
    } else if has("space1") && has("space3") {
        InputKind::PrintedSpaces
    } else if has("prevalence") && has("disease") {
        InputKind::Prevalence
    } else {
        InputKind::Unknown
    })
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn soft<T>(
    r: audit_core::Result<T>,
    what: &str,
    notes: &mut Vec<String>,
) -> audit_core::Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ AuditError::InsufficientData { .. }) => {
            notes.push(format!("{what} skipped: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

struct Analysed {
    report: DatasetReport,
    artifacts: Vec<(String, Vec<u8>)>,
    row_errors: Vec<String>,
}

fn analyse(path: &Path, thresholds: &ClassifierThresholds) -> Result<Analysed> {
    let label = default_label(path);
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let parsed = parse_effect_csv(bytes.as_slice(), &label)?;
    let ds = &parsed.value;
    let mut notes = parsed.warnings.clone();

    let series = build_series(ds)?;
    let counts = significance_counts(&series);
    let classification = soft(
        classify_with(&series, thresholds),
        "classification",
        &mut notes,
    )?;
    let pool_fixed = soft(pool(ds, Method::FixedEffect), "pooling", &mut notes)?;
    let pool_dl = soft(pool(ds, Method::DerSimonianLaird), "pooling", &mut notes)?;
    notes.dedup();
    let pool_comparison = match (&pool_dl, published_pool(ds.label())) {
        (Some(r), Some(p)) => Some(PoolComparison::new(p, r)),
        _ => None,
    };

    let mut mismatches = Vec::new();
    let mut compared = 0;
    for r in ds.records() {
        let Some(reported) = r.reported_p else {
            continue;
        };
        compared += 1;
        let computed = r.p_value()?.clamped;
        let diff = (computed - reported).abs();
        if diff > REPORTED_P_TOL {
            mismatches.push(PValueMismatch {
                study_id: r.study_id.clone(),
                name: r.display_name(),
                computed,
                reported,
                abs_diff: diff,
            });
        }
    }

    let stem = stem(path);
    let svg_path = format!("plots/{stem}.svg");
    let plot_csv_path = format!("plots/{stem}.csv");
    let pvalues_path = format!("pvalues/{stem}.csv");
    let svg = render_svg(&series, &RenderOptions::default())?;
    let mut plot_csv = Vec::new();
    write_plot_csv(&series, &mut plot_csv)?;

    Ok(Analysed {
        report: DatasetReport {
            label: ds.label().to_string(),
            source_file: file_name(path),
            n_records: ds.len(),
            counts,
            published_counts: published_counts(ds.label()),
            classification,
            pool_fixed,
            pool_dl,
            pool_comparison,
            reported_p: ReportedPCheck {
                compared,
                within_tolerance: compared - mismatches.len(),
                tolerance: REPORTED_P_TOL,
                mismatches,
            },
            plot_svg: svg_path.clone(),
            plot_csv: plot_csv_path.clone(),
            pvalues_csv: pvalues_path.clone(),
            notes,
        },
        artifacts: vec![
            (svg_path, svg.into_bytes()),
            (plot_csv_path, plot_csv),
            (pvalues_path, pvalue_csv(ds)?),
        ],
        row_errors: parsed
            .row_errors
            .iter()
            .map(|e| format!("row {}: {}", e.row, e.message))
            .collect(),
    })
}

fn printed_spaces(path: &Path) -> Result<Vec<(String, SearchSpaceResult)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_ascii_lowercase).collect();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("missing column `{name}`"))
    };
    let (id, s1, s2, s3) = (
        col("study_id")?,
        col("space1")?,
        col("space2")?,
        col("space3")?,
    );
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| -> Result<u64> {
            let v = rec.get(c).unwrap_or("");
            v.parse()
                .with_context(|| format!("row {}: non-integer `{v}`", i + 1))
        };
        out.push((
            rec.get(id).unwrap_or("").to_string(),
            SearchSpaceResult {
                space1: num(s1)?,
                space2: num(s2)?,
                space3: num(s3)?,
            },
        ));
    }
    Ok(out)
}

fn search_space_section(
    design: &Path,
    printed: Option<&Path>,
    fp_rate: f64,
) -> Result<(SearchSpaceReport, Vec<String>)> {
    let (rows, row_errors) = space_rows(design, fp_rate)?;
    let mut errors = Vec::new();
    if row_errors > 0 {
        errors.push(format!("{row_errors} bad rows"));
    }
    let results: Vec<SearchSpaceResult> = rows.iter().map(|r| r.spaces).collect();
    let summary = SpaceSummaries::of(&results)?;
    let mut printed_summary = None;
    let mut printed_mismatches = Vec::new();
    if let Some(p) = printed {
        let printed_rows = printed_spaces(p)?;
        for (id, spaces) in &printed_rows {
            match rows.iter().find(|r| &r.study_id == id) {
                Some(r) if r.spaces != *spaces => printed_mismatches.push(format!(
                    "search space `{id}`: design counts give {}/{}/{}, printed {}/{}/{}",
                    r.spaces.space1,
                    r.spaces.space2,
                    r.spaces.space3,
                    spaces.space1,
                    spaces.space2,
                    spaces.space3
                )),
                Some(_) => {}
                None => printed_mismatches.push(format!(
                    "search space `{id}`: printed row has no design counts"
                )),
            }
        }
        let printed_results: Vec<SearchSpaceResult> =
            printed_rows.iter().map(|(_, s)| *s).collect();
        printed_summary = Some(SpaceSummaries::of(&printed_results)?);
    }
    Ok((
        SearchSpaceReport {
            source_file: file_name(design),
            fp_rate,
            rows,
            summary,
            printed_file: printed.map(file_name),
            printed_summary,
            printed_mismatches,
        },
        errors,
    ))
}

fn predictive_section(prevalence_file: Option<&Path>) -> Result<(PredictiveSection, Vec<u8>)> {
    let grid = log_grid(1e-4, 1e-1, 200)?;
    let bytes = curve_csv(CURVE_ALPHA, CURVE_POWER, &CURVE_BIAS, &grid)?;
    let mut points = Vec::new();
    if let Some(path) = prevalence_file {
        let file =
            std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        let table = parse_prevalence_csv(std::io::BufReader::new(file))?.strict()?;
        for row in table {
            for bias in CURVE_BIAS {
                let params =
                    PredictiveParams::from_power(CURVE_ALPHA, CURVE_POWER, row.prevalence, bias)?;
                points.push(PrevalencePoint {
                    disease: row.disease.clone(),
                    prevalence: row.prevalence,
                    bias,
                    ppv: ppv(&params)?,
                    npv: npv(&params)?,
                });
            }
        }
    }
    Ok((
        PredictiveSection {
            curve_csv: "predictive_curve.csv".into(),
            alpha: CURVE_ALPHA,
            power: CURVE_POWER,
            bias_levels: CURVE_BIAS.to_vec(),
            prevalence_points: points,
        },
        bytes,
    ))
}

/// Builds the report in memory. Fails only when the directory cannot be read
/// or holds no effect datasets; per-file problems go into `errors`.
pub fn build_report(
    data_dir: &Path,
    thresholds: &ClassifierThresholds,
    fp_rate: f64,
) -> Result<BuiltReport> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(data_dir)
        .with_context(|| format!("cannot read directory {}", data_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();

    let mut errors = Vec::new();
    let mut effects = Vec::new();
    let (mut design, mut printed, mut prevalence) = (None, None, None);
    for f in files {
        match input_kind(&f) {
            Ok(InputKind::Effects) => effects.push(f),
            Ok(InputKind::Design) if design.is_none() => design = Some(f),
            Ok(InputKind::PrintedSpaces) if printed.is_none() => printed = Some(f),
            Ok(InputKind::Prevalence) if prevalence.is_none() => prevalence = Some(f),
            Ok(InputKind::Unknown) => errors.push(FailedInput {
                file: file_name(&f),
                message: "unrecognised header".into(),
            }),
            Ok(kind) => errors.push(FailedInput {
                file: file_name(&f),
                message: format!("ignored: a {kind:?} table was already loaded"),
            }),
            Err(e) => errors.push(FailedInput {
                file: file_name(&f),
                message: format!("{e:#}"),
            }),
        }
    }
    if effects.is_empty() {
        bail!("no effect datasets found in {}", data_dir.display());
    }

    let results: Vec<(PathBuf, Result<Analysed>)> = effects
        .par_iter()
        .map(|p| (p.clone(), analyse(p, thresholds)))
        .collect();

    let mut analysed = Vec::new();
    for (path, r) in results {
        match r {
            Ok(a) => {
                for e in &a.row_errors {
                    errors.push(FailedInput {
                        file: file_name(&path),
                        message: e.clone(),
                    });
                }
                analysed.push(a);
            }
            Err(e) => errors.push(FailedInput {
                file: file_name(&path),
                message: format!("{e:#}"),
            }),
        }
    }
    if analysed.is_empty() {
        bail!(
            "every effect dataset failed: {}",
            errors
                .iter()
                .map(|e| format!("{}: {}", e.file, e.message))
                .collect::<Vec<_>>()
                .join("; ")
        );
    }
    analysed.sort_by(|a, b| {
        a.report
            .label
            .cmp(&b.report.label)
            .then_with(|| a.report.source_file.cmp(&b.report.source_file))
    });

    let mut discrepancies = Vec::new();
    let mut artifacts = Vec::new();
    let mut datasets = Vec::new();
    for a in analysed {
        let r = &a.report;
        discrepancies.extend(count_discrepancies(&r.label, &r.counts));
        for m in &r.reported_p.mismatches {
            discrepancies.push(format!(
                "{}: `{}` ({}) computed p {:.6}, printed {}, |diff| {:.6}",
                r.label, m.study_id, m.name, m.computed, m.reported, m.abs_diff
            ));
        }
        artifacts.extend(a.artifacts);
        datasets.push(a.report);
    }

    let search_space = match &design {
        Some(d) => match search_space_section(d, printed.as_deref(), fp_rate) {
            Ok((section, errs)) => {
                discrepancies.extend(section.printed_mismatches.iter().cloned());
                errors.extend(errs.into_iter().map(|m| FailedInput {
                    file: file_name(d),
                    message: m,
                }));
                Some(section)
            }
            Err(e) => {
                errors.push(FailedInput {
                    file: file_name(d),
                    message: format!("{e:#}"),
                });
                None
            }
        },
        None => None,
    };

    let (predictive, curve) = match predictive_section(prevalence.as_deref()) {
        Ok(v) => v,
        Err(e) => {
            if let Some(p) = &prevalence {
                errors.push(FailedInput {
                    file: file_name(p),
                    message: format!("{e:#}"),
                });
            }
            predictive_section(None)?
        }
    };
    artifacts.push((predictive.curve_csv.clone(), curve));

    Ok(BuiltReport {
        report: AuditReport {
            datasets,
            search_space,
            predictive,
            discrepancies,
            errors,
        },
        artifacts,
    })
}

/// Writes the artifacts and `report.json` under `out`.
pub fn write_report(out: &Path, built: &BuiltReport) -> Result<PathBuf> {
    for (rel, bytes) in &built.artifacts {
        let path = out.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))?;
        }
        std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let mut json = serde_json::to_string_pretty(&built.report)?;
    json.push('\n');
    let path = out.join("report.json");
    std::fs::write(&path, json).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

pub fn run(a: &ReportArgs) -> Result<u8> {
    let thresholds = read_thresholds(a.thresholds.as_deref())?;
    std::fs::create_dir_all(&a.out)
        .with_context(|| format!("cannot create {}", a.out.display()))?;
    let built = build_report(&a.data, &thresholds, a.fp_rate)?;
    let path = write_report(&a.out, &built)?;
    for e in &built.report.errors {
        eprintln!("error: {}: {}", e.file, e.message);
    }
    eprintln!(
        "wrote {} ({} datasets, {} discrepancies, {} errors)",
        path.display(),
        built.report.datasets.len(),
        built.report.discrepancies.len(),
        built.report.errors.len()
    );
    Ok(u8::from(!built.report.errors.is_empty()))
}
