//! CSV tables, SVG plots and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{Cell, Plot, RateFit, Report, Table};

/// Shortest round-trip decimal; scientific notation for very large or very
/// small magnitudes.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x.is_finite() && a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn format_cell(cell: &Cell) -> String {
    match cell {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => format_float(*x),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

fn sort_key(row: &[Cell]) -> (f64, i64) {
    let n = match row.first() {
        Some(Cell::Float(x)) => *x,
        Some(Cell::Int(i)) => *i as f64,
        _ => 0.0,
    };
    let r = match row.get(1) {
        Some(Cell::Int(i)) => *i,
        _ => 0,
    };
    (n, r)
}

/// UTF-8 CSV with a header row and LF line endings. Tables led by
/// `n, replicate` columns are ordered by those.
pub fn table_csv(table: &Table) -> Vec<u8> {
    let mut rows: Vec<&Vec<Cell>> = table.rows.iter().collect();
    if table.columns.len() >= 2 && table.columns[0] == "n" && table.columns[1] == "replicate" {
        rows.sort_by(|a, b| {
            let (ka, kb) = (sort_key(a), sort_key(b));
            ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1))
        });
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(format_cell)).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `check, value, lower, upper, pass` for every check of the report.
pub fn summary_table(report: &Report) -> Table {
    let mut t = Table::new(
        format!("{}_summary", report.experiment.replace('-', "_")),
        &["check", "value", "lower", "upper", "pass"],
    );
    for c in &report.checks {
        t.push(vec![
            c.name.as_str().into(),
            c.value.into(),
            c.lower.into(),
            c.upper.into(),
            (if c.pass { "PASS" } else { "FAIL" }).into(),
        ]);
    }
    t
}

/// Writes every table, the summary and, with `svg`, the plots. Returns the
/// file names written, relative to `dir`.
pub fn write_report(report: &Report, dir: &Path, svg: bool) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for table in report.tables.iter().chain(std::iter::once(&summary_table(report))) {
        let name = format!("{}.csv", table.name);
        write_bytes(&dir.join(&name), &table_csv(table))?;
        files.push(name);
    }
    if svg {
        for plot in &report.plots {
            let (name, body) = match plot {
                Plot::Rate { name, fit } => (name, rate_svg(fit)),
                Plot::Histogram { name, samples, density } => (name, histogram_svg(name, samples, density)),
            };
            let name = format!("{name}.svg");
            write_bytes(&dir.join(&name), body.as_bytes())?;
            files.push(name);
        }
    }
    Ok(files)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = if hi > lo { hi - lo } else { 1.0 };
    (lo - 0.05 * span, hi + 0.05 * span)
}

/// Log-log scatter of per-volume means with the fitted line. The line lives
/// in a group whose transform maps `(ln n, ln mean)` to pixels, so its
/// endpoints are in data coordinates.
pub fn rate_svg(fit: &RateFit) -> String {
    let xs: Vec<f64> = fit.points.iter().map(|p| p.n.ln()).collect();
    let ys: Vec<f64> = fit.points.iter().map(|p| p.mean.ln()).collect();
    let (x0, x1) = padded(xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let line = |x: f64| fit.intercept + fit.slope * x;
    let (ylo, yhi) = ys.iter().copied().chain([line(x0), line(x1)]).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let (y0, y1) = padded(ylo, yhi);
    let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0);
    let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0);
    let px = |x: f64| MARGIN + (x - x0) * sx;
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) * sy;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{} slope {:.4} ± {:.4}</text>"#,
        WIDTH / 2.0,
        escape(&fit.label),
        fit.slope,
        fit.slope_se
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">ln n</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 20 {})">ln mean</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        r#"<g id="data" transform="matrix({} 0 0 {} {} {})">"#,
        format_float(sx),
        format_float(-sy),
        format_float(MARGIN - x0 * sx),
        format_float(HEIGHT - MARGIN + y0 * sy)
    );
    let _ = writeln!(
        s,
        r#"<line id="fit" data-slope="{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="steelblue" stroke-width="2" vector-effect="non-scaling-stroke"/>"#,
        format_float(fit.slope),
        format_float(x0),
        format_float(line(x0)),
        format_float(x1),
        format_float(line(x1))
    );
    s.push_str("</g>\n");
    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="firebrick"/>"#, px(*x), py(*y));
    }
    s.push_str("</svg>\n");
    s
}

/// Density-scaled histogram with a reference density drawn over it.
pub fn histogram_svg(title: &str, samples: &[f64], density: &[(f64, f64)]) -> String {
    const BINS: usize = 40;
    let lo = samples.iter().chain(density.iter().map(|(x, _)| x)).copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().chain(density.iter().map(|(x, _)| x)).copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (0.0, 1.0) };
    let width = (hi - lo) / BINS as f64;
    let mut counts = [0usize; BINS];
    for &v in samples {
        let b = (((v - lo) / width) as usize).min(BINS - 1);
        counts[b] += 1;
    }
    let total = samples.len().max(1) as f64;
    let heights: Vec<f64> = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    let top = heights.iter().chain(density.iter().map(|(_, y)| y)).copied().fold(0.0, f64::max).max(1e-12) * 1.05;
    let px = |x: f64| MARGIN + (x - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - y / top * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{} ({} samples)</text>"#,
        WIDTH / 2.0,
        escape(title),
        samples.len()
    );
    for (i, h) in heights.iter().enumerate() {
        let x = lo + i as f64 * width;
        let _ = writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="lightgray" stroke="gray"/>"#,
            px(x),
            py(*h),
            px(x + width) - px(x),
            py(0.0) - py(*h)
        );
    }
    if !density.is_empty() {
        let pts: Vec<String> = density.iter().map(|(x, y)| format!("{:.3},{:.3}", px(*x), py(*y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, pts.join(" "));
    }
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        py(0.0),
        WIDTH - MARGIN
    );
    s.push_str("</svg>\n");
    s
}

/// Provenance of one CLI run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub version: String,
    pub seed: u64,
    pub subcommand: String,
    pub started: String,
    pub finished: String,
    /// Output file names per experiment, relative to the output directory.
    pub files: BTreeMap<String, Vec<String>>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub passed: bool,
}

pub fn timestamp() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_default()
}

pub fn write_manifest(manifest: &RunManifest, dir: &Path) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    write_bytes(&path, text.as_bytes())?;
    Ok(path)
}
