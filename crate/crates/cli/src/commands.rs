use std::path::Path;

use anyhow::{bail, Context, Result};
use audit_core::fixtures::{
    count_discrepancies, published_counts, published_pool, PublishedCounts,
};
use audit_core::predictive::log_grid;
use audit_core::pvplot::{render_svg, write_plot_csv, RenderOptions};
use audit_core::searchspace::{expected_false_positives, format_lower_bound, summarize_spaces};
use audit_core::{
    build_series, classify_with, compute_spaces, parse_searchspace_csv, pool as pool_dataset,
    predictive_curve, significance_counts, simulate_dataset, write_effect_csv, Method,
    PollutantDataset, PoolResult, Scenario, SearchSpaceResult, SearchSpaceSummary,
    SignificanceCounts, SimConfig, SpaceField,
};
use serde::Serialize;

use crate::args::{
    ClassifyArgs, ConvertArgs, InputArgs, PlotArgs, PlotFormat, PoolArgs, PoolMethod, PredictArgs,
    ScenarioArg, SimulateArgs, SpaceArgs,
};
use crate::report::PoolComparison;
use crate::{read_effects, read_thresholds, write_output};

fn json_line<T: Serialize>(value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_output(None, text.as_bytes())
}

/// Row-level problems leave a usable dataset but still fail the command.
fn row_status(errors: usize) -> u8 {
    u8::from(errors > 0)
}

/// One row per record with raw and clamped p.
pub fn pvalue_csv(ds: &PollutantDataset) -> Result<Vec<u8>> {
    let mut w = csv_writer(Vec::new());
    w.write_record([
        "label",
        "study_id",
        "first_author",
        "subgroup",
        "rr",
        "lcl",
        "ucl",
        "p_raw",
        "p_clamped",
        "reported_p",
    ])?;
    for r in ds.records() {
        let p = r.p_value()?;
        w.write_record([
            ds.label().to_string(),
            r.study_id.clone(),
            r.first_author.clone(),
            r.subgroup.clone().unwrap_or_default(),
            r.rr.to_string(),
            r.lcl.to_string(),
            r.ucl.to_string(),
            p.raw.to_string(),
            p.clamped.to_string(),
            r.reported_p.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.into_inner().context("flushing CSV")
}

pub fn convert(a: &ConvertArgs) -> Result<u8> {
    let parsed = read_effects(&a.input.input, a.input.label.as_deref())?;
    write_output(a.output.as_deref(), &pvalue_csv(&parsed.value)?)?;
    Ok(row_status(parsed.row_errors.len()))
}

fn csv_writer(buf: Vec<u8>) -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(buf)
}

pub fn plot(a: &PlotArgs) -> Result<u8> {
    let parsed = read_effects(&a.input.input, a.input.label.as_deref())?;
    let series = build_series(&parsed.value)?;
    let bytes = match a.format {
        PlotFormat::Svg => {
            let opts = RenderOptions {
                width: a.width,
                height: a.height,
                ..Default::default()
            };
            render_svg(&series, &opts)?.into_bytes()
        }
        PlotFormat::Csv => {
            let mut buf = Vec::new();
            write_plot_csv(&series, &mut buf)?;
            buf
        }
    };
    write_output(Some(&a.out), &bytes)?;
    Ok(row_status(parsed.row_errors.len()))
}

pub fn classify(a: &ClassifyArgs) -> Result<u8> {
    let thresholds = read_thresholds(a.thresholds.as_deref())?;
    let parsed = read_effects(&a.input.input, a.input.label.as_deref())?;
    let c = classify_with(&build_series(&parsed.value)?, &thresholds)?;
    json_line(&c)?;
    Ok(row_status(parsed.row_errors.len()))
}

#[derive(Serialize)]
struct CountsOutput {
    label: String,
    #[serde(flatten)]
    counts: SignificanceCounts,
    published: Option<PublishedCounts>,
    discrepancies: Vec<String>,
}

pub fn counts(a: &InputArgs) -> Result<u8> {
    let parsed = read_effects(&a.input, a.label.as_deref())?;
    let ds = &parsed.value;
    let counts = significance_counts(&build_series(ds)?);
    json_line(&CountsOutput {
        label: ds.label().to_string(),
        counts,
        published: published_counts(ds.label()),
        discrepancies: count_discrepancies(ds.label(), &counts),
    })?;
    Ok(row_status(parsed.row_errors.len()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceRow {
    pub study_id: String,
    #[serde(flatten)]
    pub spaces: SearchSpaceResult,
    pub expected_false_positives: f64,
    pub lower_bound: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceSummaries {
    pub space1: SearchSpaceSummary,
    pub space2: SearchSpaceSummary,
    pub space3: SearchSpaceSummary,
}

impl SpaceSummaries {
    pub fn of(results: &[SearchSpaceResult]) -> audit_core::Result<Self> {
        Ok(SpaceSummaries {
            space1: summarize_spaces(results, SpaceField::Space1)?,
            space2: summarize_spaces(results, SpaceField::Space2)?,
            space3: summarize_spaces(results, SpaceField::Space3)?,
        })
    }
}

pub fn space_rows(path: &Path, fp_rate: f64) -> Result<(Vec<SpaceRow>, usize)> {
    let file =
        std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let parsed = parse_searchspace_csv(std::io::BufReader::new(file))
        .with_context(|| format!("reading {}", path.display()))?;
    for e in &parsed.row_errors {
        eprintln!("{}: row {}: {}", path.display(), e.row, e.message);
    }
    let mut rows = Vec::with_capacity(parsed.value.len());
    for rec in &parsed.value {
        let spaces = compute_spaces(rec)?;
        let fp = expected_false_positives(spaces.space3, fp_rate)?;
        rows.push(SpaceRow {
            study_id: rec.study_id.clone(),
            spaces,
            expected_false_positives: fp,
            lower_bound: format_lower_bound(fp),
        });
    }
    Ok((rows, parsed.row_errors.len()))
}

#[derive(Serialize)]
struct SpaceOutput {
    fp_rate: f64,
    rows: Vec<SpaceRow>,
    summary: SpaceSummaries,
}

pub fn space(a: &SpaceArgs) -> Result<u8> {
    let (rows, errors) = space_rows(&a.input, a.fp_rate)?;
    let results: Vec<SearchSpaceResult> = rows.iter().map(|r| r.spaces).collect();
    let summary = SpaceSummaries::of(&results)?;
    json_line(&SpaceOutput {
        fp_rate: a.fp_rate,
        rows,
        summary,
    })?;
    Ok(row_status(errors))
}

/// Parses `lo:hi:n`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        bail!("grid must look like lo:hi:n, got `{text}`");
    };
    let lo: f64 = lo
        .trim()
        .parse()
        .with_context(|| format!("bad grid start `{lo}`"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .with_context(|| format!("bad grid end `{hi}`"))?;
    let n: usize = n
        .trim()
        .parse()
        .with_context(|| format!("bad grid size `{n}`"))?;
    Ok(log_grid(lo, hi, n)?)
}

pub fn curve_csv(alpha: f64, power: f64, bias: &[f64], prevalences: &[f64]) -> Result<Vec<u8>> {
    if !(power > 0.0 && power < 1.0) {
        bail!("power must lie in (0, 1), got {power}");
    }
    let rows = predictive_curve(alpha, 1.0 - power, bias, prevalences)?;
    let mut w = csv_writer(Vec::new());
    w.write_record(["prevalence", "bias", "ppv", "npv"])?;
    for r in rows {
        w.write_record([
            r.prevalence.to_string(),
            r.bias.to_string(),
            r.ppv.to_string(),
            r.npv.to_string(),
        ])?;
    }
    w.into_inner().context("flushing CSV")
}

pub fn predict(a: &PredictArgs) -> Result<u8> {
    let prevalences = match &a.prevalence {
        Some(p) => p.clone(),
        None => parse_grid(&a.grid)?,
    };
    let bytes = curve_csv(a.alpha, a.power, &a.bias, &prevalences)?;
    write_output(a.out.as_deref(), &bytes)?;
    Ok(0)
}

#[derive(Serialize)]
struct PoolOutput {
    label: String,
    result: PoolResult,
    comparison: Option<PoolComparison>,
}

pub fn pool(a: &PoolArgs) -> Result<u8> {
    let parsed = read_effects(&a.input.input, a.input.label.as_deref())?;
    let ds = &parsed.value;
    let method = match a.method {
        PoolMethod::Dl => Method::DerSimonianLaird,
        PoolMethod::Fixed => Method::FixedEffect,
    };
    let result = pool_dataset(ds, method)?;
    let comparison = published_pool(ds.label()).map(|p| PoolComparison::new(p, &result));
    if let Some(c) = &comparison {
        eprintln!(
            "{}: pooled RR {:.4} ({:.4}, {:.4}), I2 {:.1}%; published {:.3} ({:.3}, {:.3}), I2 {:.1}%; |gap| RR {:.4}, I2 {:.1}",
            ds.label(),
            result.pooled_rr,
            result.ci95.0,
            result.ci95.1,
            result.i_squared_pct,
            c.published.rr,
            c.published.lcl,
            c.published.ucl,
            c.published.i_squared_pct,
            c.rr_gap.abs(),
            c.i_squared_gap.abs()
        );
    }
    json_line(&PoolOutput {
        label: ds.label().to_string(),
        result,
        comparison,
    })?;
    Ok(row_status(parsed.row_errors.len()))
}

pub fn sim_config(a: &SimulateArgs) -> Result<SimConfig> {
    let mut c = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            toml::from_str::<SimConfig>(&text)
                .with_context(|| format!("bad simulation config {}", path.display()))?
        }
        None => SimConfig::default(),
    };
    if let Some(s) = a.scenario {
        c.scenario = match s {
            ScenarioArg::Null => Scenario::AllNull,
            ScenarioArg::Alt => Scenario::AllAlternative,
            ScenarioArg::Phacked => Scenario::PHackedMixture,
        };
        // Without a config file, the alternative gets the strong preset.
        if c.scenario == Scenario::AllAlternative && a.config.is_none() {
            let strong = SimConfig::strong_alternative();
            c.true_log_rr = strong.true_log_rr;
            c.se_range = strong.se_range;
        }
    }
    if let Some(n) = a.n {
        c.n_studies = n;
    }
    if let Some(m) = a.tests {
        c.tests_per_study = m;
    }
    if let Some(f) = a.hacked_frac {
        c.hacked_fraction = f;
    }
    if let Some(d) = a.delta {
        c.true_log_rr = d;
    }
    if let Some(lo) = a.se_lo {
        c.se_range.0 = lo;
    }
    if let Some(hi) = a.se_hi {
        c.se_range.1 = hi;
    }
    if let Some(seed) = a.seed {
        c.seed = seed;
    }
    c.validate()?;
    Ok(c)
}

pub fn simulate(a: &SimulateArgs) -> Result<u8> {
    let config = sim_config(a)?;
    let ds = simulate_dataset(&config)?;
    let mut buf = Vec::new();
    write_effect_csv(&ds, &mut buf)?;
    write_output(a.out.as_deref(), &buf)?;
    Ok(0)
}
