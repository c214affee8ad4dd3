//! Static SVG line plots with linear or logarithmic axes.
//!
//! Output depends only on the inputs, so identical data gives identical bytes.

use std::fmt::Write;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub width: u32,
    pub height: u32,
}

impl PlotStyle {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_axis: Axis::Linear,
            y_axis: Axis::Linear,
            width: 720,
            height: 480,
        }
    }

    pub fn log_x(mut self) -> Self {
        self.x_axis = Axis::Log;
        self
    }

    pub fn log_y(mut self) -> Self {
        self.y_axis = Axis::Log;
        self
    }

    pub fn log_log(self) -> Self {
        self.log_x().log_y()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlotError {
    #[error("nothing to plot")]
    Empty,
    #[error("series `{0}` has no points")]
    EmptySeries(String),
    #[error("series `{0}` has a non-finite point")]
    NonFinite(String),
    #[error("series `{0}` has a non-positive value on a log axis")]
    NonPositive(String),
    #[error("plot size too small")]
    TooSmall,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Axis range in transformed coordinates (log10 for log axes).
#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
    axis: Axis,
}

impl Range {
    fn fit(values: impl Iterator<Item = f64>, axis: Axis) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        if hi - lo <= 1e-12 * lo.abs().max(hi.abs()).max(1e-300) {
            let pad = if axis == Axis::Log {
                0.5
            } else {
                0.5 * lo.abs().max(1.0)
            };
            lo -= pad;
            hi += pad;
        } else if axis == Axis::Linear {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Self { lo, hi, axis }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions in transformed coordinates and their labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        match self.axis {
            Axis::Log => {
                let (a, b) = (self.lo.ceil() as i64, self.hi.floor() as i64);
                let step = ((b - a) / 8 + 1).max(1);
                let mut out: Vec<(f64, String)> = (a..=b)
                    .step_by(step as usize)
                    .map(|k| (k as f64, format!("1e{k}")))
                    .collect();
                if out.is_empty() {
                    let mid = 0.5 * (self.lo + self.hi);
                    out.push((mid, format!("{:.3e}", 10f64.powf(mid))));
                }
                out
            }
            Axis::Linear => {
                let span = self.hi - self.lo;
                let raw = span / 5.0;
                let mag = 10f64.powf(raw.log10().floor());
                let step = [1.0, 2.0, 5.0, 10.0]
                    .iter()
                    .map(|m| m * mag)
                    .find(|s| *s >= raw)
                    .unwrap_or(10.0 * mag);
                let first = (self.lo / step).ceil() as i64;
                let last = (self.hi / step).floor() as i64;
                (first..=last)
                    .map(|k| {
                        let v = k as f64 * step;
                        (v, format_tick(v, step))
                    })
                    .collect()
            }
        }
    }
}

fn format_tick(v: f64, step: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.2e}");
    }
    let digits = (-step.log10().floor()).max(0.0) as usize;
    format!("{v:.digits$}")
}

fn transform(v: f64, axis: Axis) -> f64 {
    match axis {
        Axis::Linear => v,
        Axis::Log => v.log10(),
    }
}

/// Renders the series as an SVG document.
pub fn emit_plot(series: &[Series], style: &PlotStyle) -> Result<String, PlotError> {
    if series.is_empty() {
        return Err(PlotError::Empty);
    }
    let (w, h) = (style.width as f64, style.height as f64);
    if w <= LEFT + RIGHT + 10.0 || h <= TOP + BOTTOM + 10.0 {
        return Err(PlotError::TooSmall);
    }
    let mut pts: Vec<Vec<(f64, f64)>> = Vec::with_capacity(series.len());
    for s in series {
        if s.points.is_empty() {
            return Err(PlotError::EmptySeries(s.label.clone()));
        }
        let mut out = Vec::with_capacity(s.points.len());
        for &(x, y) in &s.points {
            if !(x.is_finite() && y.is_finite()) {
                return Err(PlotError::NonFinite(s.label.clone()));
            }
            if (style.x_axis == Axis::Log && x <= 0.0) || (style.y_axis == Axis::Log && y <= 0.0) {
                return Err(PlotError::NonPositive(s.label.clone()));
            }
            out.push((transform(x, style.x_axis), transform(y, style.y_axis)));
        }
        pts.push(out);
    }
    let xr = Range::fit(pts.iter().flatten().map(|p| p.0), style.x_axis);
    let yr = Range::fit(pts.iter().flatten().map(|p| p.1), style.y_axis);
    let (pw, ph) = (w - LEFT - RIGHT, h - TOP - BOTTOM);
    let px = |x: f64| LEFT + xr.frac(x) * pw;
    let py = |y: f64| TOP + (1.0 - yr.frac(y)) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&style.title)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#333"/>"##
    );
    for (v, label) in xr.ticks() {
        let x = px(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 16.0,
            escape(&label)
        );
    }
    for (v, label) in yr.ticks() {
        let y = py(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            escape(&label)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        h - 14.0,
        escape(&style.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&style.y_label)
    );
    for (k, (s, p)) in series.iter().zip(&pts).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = p
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
            path.join(" ")
        );
        if p.len() <= 40 {
            for &(x, y) in p {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    px(x),
                    py(y)
                );
            }
        }
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
