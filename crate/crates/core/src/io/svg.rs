//! Static SVG line charts.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SvgError {
    #[error("chart has no series")]
    NoSeries,
    #[error("series `{0}` has no points")]
    EmptySeries(String),
    #[error("series `{0}` contains a non-finite value")]
    NonFinite(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            dashed: false,
        }
    }

    /// `y[k]` plotted against `x0 + k·dx`.
    pub fn from_values(name: impl Into<String>, x0: f64, dx: f64, y: &[f64]) -> Self {
        Self::new(name, y.iter().enumerate().map(|(k, &v)| (x0 + k as f64 * dx, v)).collect())
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

/// Horizontal reference line.
#[derive(Debug, Clone, PartialEq)]
pub struct RefLine {
    pub y: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub ref_lines: Vec<RefLine>,
    pub width: f64,
    pub height: f64,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

impl LineChart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            width: 720.0,
            height: 440.0,
            ..Self::default()
        }
    }

    pub fn series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    pub fn ref_line(mut self, y: f64, label: &str) -> Self {
        self.ref_lines.push(RefLine { y, label: label.into() });
        self
    }

    pub fn render(&self) -> Result<String, SvgError> {
        if self.series.is_empty() {
            return Err(SvgError::NoSeries);
        }
        for s in &self.series {
            if s.points.is_empty() {
                return Err(SvgError::EmptySeries(s.name.clone()));
            }
            if s.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return Err(SvgError::NonFinite(s.name.clone()));
            }
        }
        if let Some(r) = self.ref_lines.iter().find(|r| !r.y.is_finite()) {
            return Err(SvgError::NonFinite(r.label.clone()));
        }

        let pts = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        for r in &self.ref_lines {
            y0 = y0.min(r.y);
            y1 = y1.max(r.y);
        }
        if x1 == x0 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        let pad = (y1 - y0).max(1e-9) * 0.05;
        y0 -= pad;
        y1 += pad;

        let (w, h) = (self.width, self.height);
        let (left, right, top, bottom) = (70.0, 170.0, 40.0, 60.0);
        let pw = w - left - right;
        let ph = h - top - bottom;
        let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(o, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            o,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            left + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            o,
            r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for k in 0..=5 {
            let f = k as f64 / 5.0;
            let xv = x0 + f * (x1 - x0);
            let yv = y0 + f * (y1 - y0);
            let _ = writeln!(
                o,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                sx(xv),
                top + ph + 18.0,
                tick(xv)
            );
            let _ = writeln!(
                o,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                left - 6.0,
                sy(yv) + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            o,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            left + pw / 2.0,
            h - 18.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            o,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            top + ph / 2.0,
            escape(&self.y_label)
        );
        for r in &self.ref_lines {
            let y = sy(r.y);
            let _ = writeln!(
                o,
                r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#555" stroke-dasharray="2,3"/>"##,
                left + pw
            );
            let _ = writeln!(
                o,
                r##"<text x="{:.2}" y="{:.2}" fill="#555">{}</text>"##,
                left + pw + 4.0,
                y + 4.0,
                escape(&r.label)
            );
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let _ = writeln!(
                o,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"><title>{}</title></polyline>"#,
                pts.join(" "),
                escape(&s.name)
            );
            let ly = top + 14.0 + i as f64 * 18.0;
            let lx = w - right + 14.0;
            let _ = writeln!(
                o,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#,
                lx + 22.0
            );
            let _ = writeln!(o, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, escape(&s.name));
        }
        o.push_str("</svg>\n");
        Ok(o)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let svg = self
            .render()
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
        super::write_atomic(path, svg.as_bytes())
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
