//! Spread-vs-k and time-vs-k line charts as standalone SVG.
//!
//! Output is a pure function of the input rows, so re-rendering the same
//! CSV produces byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::experiment::{TrialRecord, CSV_COLUMNS};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Reads trial rows, rejecting files whose header is not the trial schema.
/// A zero-byte file counts as empty.
pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_COLUMNS {
        let missing: Vec<&str> = CSV_COLUMNS.iter().copied().filter(|c| !header.iter().any(|h| h == c)).collect();
        let unexpected: Vec<&str> =
            header.iter().map(String::as_str).filter(|h| !CSV_COLUMNS.contains(h)).collect();
        bail!(
            "{}: column mismatch; missing {:?}, unexpected {:?}{}",
            path.display(),
            missing,
            unexpected,
            if missing.is_empty() && unexpected.is_empty() { " (order differs)" } else { "" }
        );
    }
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("{}: row {}", path.display(), i + 2)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(k, mean value)` sorted by `k`.
    pub points: Vec<(f64, f64)>,
}

/// Per-variant mean of `value` at each `k`. Series keep the order in which
/// variants first appear.
pub fn aggregate(records: &[TrialRecord], value: impl Fn(&TrialRecord) -> f64) -> Vec<Series> {
    let mut order: Vec<String> = Vec::new();
    let mut sums: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for r in records {
        let vi = match order.iter().position(|v| *v == r.variant) {
            Some(i) => i,
            None => {
                order.push(r.variant.clone());
                order.len() - 1
            }
        };
        let e = sums.entry((vi, r.k)).or_insert((0.0, 0));
        e.0 += value(r);
        e.1 += 1;
    }
    order
        .into_iter()
        .enumerate()
        .map(|(vi, label)| Series {
            label,
            points: sums
                .range((vi, 0)..(vi + 1, 0))
                .map(|(&(_, k), &(s, c))| (k as f64, s / c as f64))
                .collect(),
        })
        .collect()
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    step * mag
}

fn fmt_tick(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= 0.0 {
        y1 = 1.0;
    }
    let y_step = nice_step(y1);
    let y1 = (y1 / y_step).ceil() * y_step;
    let x_step = nice_step(x1 - x0);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + plot_h - y / y1 * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + plot_w / 2.0, xml(title));
    let _ = writeln!(
        svg,
        r#"<path d="M{LEFT:.1},{TOP:.1} V{:.1} H{:.1}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    );

    let mut t = (x0 / x_step).ceil() * x_step;
    while t <= x1 + 1e-9 * x_step {
        let px = sx(t);
        let _ = writeln!(svg, r#"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/>"#, TOP + plot_h, TOP + plot_h + 5.0);
        let _ = writeln!(svg, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, TOP + plot_h + 18.0, fmt_tick(t));
        t += x_step;
    }
    let mut t = 0.0;
    while t <= y1 + 1e-9 * y_step {
        let py = sy(t);
        let _ = writeln!(svg, r#"<line x1="{:.1}" y1="{py:.1}" x2="{LEFT:.1}" y2="{py:.1}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(svg, r##"<line x1="{LEFT:.1}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#e0e0e0"/>"##, LEFT + plot_w);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, LEFT - 8.0, py + 4.0, fmt_tick(t));
        t += y_step;
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + plot_w / 2.0, HEIGHT - 10.0, xml(x_label));
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        xml(y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-label="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            xml(&s.label),
            coords.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(svg, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(svg, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 26.0, ly + 4.0, xml(&s.label));
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders `spread.svg` and `time.svg` into `out_dir` from the rows of all
/// `csvs`; returns the written paths.
pub fn render(csvs: &[PathBuf], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut records = Vec::new();
    for p in csvs {
        records.extend(read_trials(p)?);
    }
    fs::create_dir_all(out_dir)?;
    let spread = aggregate(&records, |r| r.spread_mean);
    let time = aggregate(&records, |r| r.time_total_ms);
    let charts = [
        ("spread.svg", line_chart("Influence spread", "k", "spread", &spread)),
        ("time.svg", line_chart("Running time", "k", "time (ms)", &time)),
    ];
    let mut written = Vec::new();
    for (name, svg) in charts {
        let path = out_dir.join(name);
        fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}
