//! Line charts of model series as standalone SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::engine::Series;
use crate::error::{Error, Result};
use crate::io::report::format_sig;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// One plotted line; `points` are (period, value) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub unit: String,
    pub points: Vec<(usize, f64)>,
}

impl PlotSeries {
    /// Takes the periods of `series` up to and including `last_period`.
    pub fn from_series(name: &str, series: &Series, last_period: Option<usize>) -> Self {
        let end = last_period.unwrap_or(usize::MAX);
        PlotSeries {
            name: name.to_string(),
            unit: series.unit.clone(),
            points: series.points().take_while(|&(p, _)| p <= end).collect(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_svg(title: &str, series: &[PlotSeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::config("nothing to plot"));
    }
    if let Some(s) = series.iter().find(|s| s.points.is_empty()) {
        return Err(Error::config(format!("series '{}' has no points", s.name)));
    }
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1) = (usize::MAX, 0usize);
    let (mut y0, mut y1) = (0.0f64, f64::NEG_INFINITY);
    for &(p, v) in all {
        x0 = x0.min(p);
        x1 = x1.max(p);
        y0 = y0.min(v);
        y1 = y1.max(v);
    }
    if x1 == x0 {
        x1 = x0 + 1;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |p: usize| LEFT + (p - x0) as f64 / (x1 - x0) as f64 * plot_w;
    let sy = |v: f64| TOP + plot_h - (v - y0) / (y1 - y0) * plot_h;

    let mut units: Vec<&str> = series.iter().map(|s| s.unit.as_str()).collect();
    units.dedup();
    let y_label = units.join(", ");

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{LEFT},{TOP} V{} H{}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    );
    for i in 0..=TICKS {
        let v = y0 + (y1 - y0) * i as f64 / TICKS as f64;
        let y = sy(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 4.0,
            format_sig(v)
        );
    }
    let step = ((x1 - x0) / 10).max(1);
    for p in (x0..=x1).step_by(step) {
        let x = sx(p);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{p}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 4.0,
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">period</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .points
            .iter()
            .map(|&(p, v)| format!("{:.2},{:.2}", sx(p), sy(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(&s.name)
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{} ({})</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.name),
            escape(&s.unit)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(path: &Path, title: &str, series: &[PlotSeries]) -> Result<()> {
    let svg = render_svg(title, series)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}
