//! Line plots of run CSVs as standalone SVG.

use crate::error::{HarnessError, Result};
use crate::metrics::{read_rows, MetricsRow};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    Iterations,
    /// The `wall_clock_s` column.
    CpuTime,
}

impl XAxis {
    fn slug(&self) -> &'static str {
        match self {
            XAxis::Iterations => "iterations",
            XAxis::CpuTime => "cpu-time",
        }
    }

    fn caption(&self) -> &'static str {
        match self {
            XAxis::Iterations => "iterations",
            XAxis::CpuTime => "CPU time (s)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Objective,
    Infeasibility,
    NearStationarity,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Objective, Metric::Infeasibility, Metric::NearStationarity];

    fn slug(&self) -> &'static str {
        match self {
            Metric::Objective => "objective",
            Metric::Infeasibility => "infeasibility",
            Metric::NearStationarity => "near_stationarity",
        }
    }

    fn caption(&self) -> &'static str {
        match self {
            Metric::Objective => "Objective",
            Metric::Infeasibility => "Infeasibility",
            Metric::NearStationarity => "Near Stationarity",
        }
    }

    fn value(&self, r: &MetricsRow) -> Option<f64> {
        match self {
            Metric::Objective => Some(r.objective),
            Metric::Infeasibility => Some(r.infeasibility),
            Metric::NearStationarity => r.near_stationarity,
        }
    }
}

/// A CSV and the legend entry for its curve.
#[derive(Debug, Clone)]
pub struct PlotInput {
    pub label: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub fn series_from_rows(label: &str, rows: &[MetricsRow], metric: Metric, axis: XAxis) -> Series {
    let points = rows
        .iter()
        .filter_map(|r| {
            let x = match axis {
                XAxis::Iterations => r.iteration as f64 + 1.0,
                XAxis::CpuTime => r.wall_clock_s,
            };
            metric.value(r).map(|y| (x, y))
        })
        .collect();
    Series { label: label.to_string(), points }
}

/// One SVG per metric that has data, named `{title}-{metric}-{axis}.svg`.
pub fn emit_plots(inputs: &[PlotInput], out_dir: &Path, title: &str, axis: XAxis, log_y: bool) -> Result<Vec<PathBuf>> {
    if inputs.is_empty() {
        return Err(HarnessError::Invalid("nothing to plot".into()));
    }
    let mut tables = Vec::with_capacity(inputs.len());
    for input in inputs {
        tables.push((input.label.clone(), read_rows(&input.path)?));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut written = Vec::new();
    for metric in Metric::ALL {
        let series: Vec<Series> = tables
            .iter()
            .map(|(label, rows)| series_from_rows(label, rows, metric, axis))
            .filter(|s| !s.points.is_empty())
            .collect();
        if series.is_empty() {
            continue;
        }
        let svg = render_svg(&format!("{title}: {}", metric.caption()), axis.caption(), metric.caption(), &series, log_y);
        let path = out_dir.join(format!("{}-{}-{}.svg", sanitize(title), metric.slug(), axis.slug()));
        std::fs::write(&path, svg).map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Tick positions at 1–2–5 multiples covering `[lo, hi]`.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Renders curves on shared axes. With `log_y`, nonpositive values are
/// dropped; if nothing positive remains the y axis falls back to linear.
pub fn render_svg(title: &str, x_caption: &str, y_caption: &str, series: &[Series], log_y: bool) -> String {
    let positive = series.iter().flat_map(|s| &s.points).any(|p| p.1 > 0.0 && p.1.is_finite());
    let log_y = log_y && positive;
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let keep = |p: &(f64, f64)| p.0.is_finite() && p.1.is_finite() && (!log_y || p.1 > 0.0);

    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied().filter(keep)).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(ty(y));
        y1 = y1.max(ty(y));
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        let pad = if y0 == 0.0 { 1.0 } else { 0.5 * y0.abs() };
        y0 -= pad;
        y1 += pad;
    }
    if log_y {
        y0 = y0.floor();
        y1 = y1.ceil().max(y0 + 1.0);
    } else {
        let pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, escape(title));
    let _ = writeln!(s, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##);

    for t in linear_ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e4e4e4"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, fmt_tick(t));
    }
    let yt: Vec<(f64, String)> = if log_y {
        (y0 as i64..=y1 as i64).map(|e| (10f64.powi(e as i32), format!("1e{e}"))).collect()
    } else {
        linear_ticks(y0, y1).into_iter().map(|v| (v, fmt_tick(v))).collect()
    };
    for (v, text) in yt {
        let y = sy(v);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e4e4e4"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{text}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 14.0, escape(x_caption));
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + ph / 2.0,
        escape(y_caption)
    );

    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = ser.points.iter().filter(|p| keep(p)).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        if path.len() == 1 {
            let _ = writeln!(s, r#"<circle cx="{}" r="3" fill="{color}"/>"#, path[0].replacen(',', "\" cy=\"", 1));
        } else if !path.is_empty() {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#, path.join(" "));
        }
        let ly = TOP + 14.0 + 20.0 * k as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/>"#, lx + 22.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}
