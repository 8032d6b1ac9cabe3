//! Command implementations behind the `audit` binary.

pub mod args;
pub mod commands;
pub mod report;

use std::path::Path;

use anyhow::{Context, Result};
use audit_core::fixtures::label_for_file;
use audit_core::{parse_effect_csv, ClassifierThresholds, Parsed, PollutantDataset};

pub use args::{Cli, Command};
pub use report::{build_report, AuditReport};

/// Runs one parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Convert(a) => commands::convert(&a),
        Command::Plot(a) => commands::plot(&a),
        Command::Classify(a) => commands::classify(&a),
        Command::Counts(a) => commands::counts(&a),
        Command::Space(a) => commands::space(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Pool(a) => commands::pool(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Report(a) => report::run(&a),
    }
}

pub fn default_label(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    label_for_file(&name)
}

/// Reads an effect CSV, printing row diagnostics and warnings to stderr.
pub fn read_effects(path: &Path, label: Option<&str>) -> Result<Parsed<PollutantDataset>> {
    let label = label
        .map(str::to_string)
        .unwrap_or_else(|| default_label(path));
    let file =
        std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let parsed = parse_effect_csv(std::io::BufReader::new(file), &label)
        .with_context(|| format!("reading {}", path.display()))?;
    for e in &parsed.row_errors {
        eprintln!("{}: row {}: {}", path.display(), e.row, e.message);
    }
    for w in &parsed.warnings {
        eprintln!("{}: warning: {w}", path.display());
    }
    Ok(parsed)
}

pub fn read_thresholds(path: Option<&Path>) -> Result<ClassifierThresholds> {
    let Some(path) = path else {
        return Ok(ClassifierThresholds::default());
    };
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let t: ClassifierThresholds =
        toml::from_str(&text).with_context(|| format!("bad thresholds file {}", path.display()))?;
    t.validate()?;
    Ok(t)
}

pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("cannot create {}", dir.display()))?;
            }
            std::fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display()))
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .context("writing to stdout")
        }
    }
}
