//! SVG and CSV output for p-value plots. Output bytes depend only on the
//! series and options.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::PValueSeries;
use crate::error::{AuditError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    pub width: u32,
    pub height: u32,
    /// Defaults to the series label.
    pub title: Option<String>,
    pub point_radius: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            width: 640,
            height: 480,
            title: None,
            point_radius: 3.0,
        }
    }
}

const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Self-contained SVG: one circle per entry, a dashed line at p = .05 and
/// the diagonal p = rank/n.
pub fn render_svg(series: &PValueSeries, opts: &RenderOptions) -> Result<String> {
    let n = series.len();
    if n == 0 {
        return Err(AuditError::EmptyInput("cannot plot an empty series".into()));
    }
    let (w, h) = (opts.width as f64, opts.height as f64);
    let plot_w = w - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = h - MARGIN_TOP - MARGIN_BOTTOM;
    if plot_w < 10.0 || plot_h < 10.0 {
        return Err(AuditError::InvalidArgument(format!(
            "canvas {}x{} too small",
            opts.width, opts.height
        )));
    }
    let x = |rank: f64| MARGIN_LEFT + rank / n as f64 * plot_w;
    let y = |p: f64| MARGIN_TOP + (1.0 - p) * plot_h;
    let title = escape(opts.title.as_deref().unwrap_or(&series.source_label));

    let mut s = String::new();
    // Writing into a String cannot fail.
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        opts.width, opts.height, opts.width, opts.height
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        opts.width, opts.height
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        w / 2.0,
        title
    );
    let _ = writeln!(
        s,
        r#"<path class="axis" d="M{:.2} {:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{:.2}</text>"#,
            MARGIN_LEFT - 6.0,
            y(tick) + 4.0,
            tick
        );
    }
    for rank in x_ticks(n) {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            x(rank as f64),
            MARGIN_TOP + plot_h + 16.0,
            rank
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">Rank</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">p-value</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );
    let _ = writeln!(
        s,
        r#"<line class="reference" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="red" stroke-dasharray="4 3"/>"#,
        x(0.0),
        y(0.05),
        x(n as f64),
        y(0.05)
    );
    let _ = writeln!(
        s,
        r#"<line class="reference" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray"/>"#,
        x(0.0),
        y(0.0),
        x(n as f64),
        y(1.0)
    );
    for e in &series.entries {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="steelblue"><title>{} p={:.6}</title></circle>"#,
            x(e.rank as f64),
            y(e.p_clamped),
            opts.point_radius,
            escape(&e.study_id),
            e.p_clamped
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn x_ticks(n: usize) -> Vec<usize> {
    let step = match n {
        0..=10 => 1,
        11..=25 => 5,
        26..=60 => 10,
        61..=150 => 20,
        _ => (n / 5).max(1),
    };
    let mut ticks: Vec<usize> = (step..=n).step_by(step).collect();
    if ticks.last() != Some(&n) && n % step > step / 2 {
        ticks.push(n);
    }
    ticks
}

/// Rows `rank,p_raw,p_clamped,study_id`.
pub fn write_plot_csv<W: Write>(series: &PValueSeries, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["rank", "p_raw", "p_clamped", "study_id"])?;
    for e in &series.entries {
        w.write_record([
            e.rank.to_string(),
            e.p_raw.to_string(),
            e.p_clamped.to_string(),
            e.study_id.clone(),
        ])?;
    }
    w.flush().map_err(|e| AuditError::Csv(e.to_string()))?;
    Ok(())
}
