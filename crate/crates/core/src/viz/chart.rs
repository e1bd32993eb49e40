//! Line charts with annotated markers, and a simple bar chart.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{escape, px, star_points, svg_open, tick_label, write_svg, VizError};

const W: f64 = 800.0;
const H: f64 = 500.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Glyph {
    Star,
    Dot,
    Vline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub glyph: Glyph,
    #[serde(default)]
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChartSpec {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub x_label: String,
    #[serde(default)]
    pub y_label: String,
    pub series: Vec<Series>,
    #[serde(default)]
    pub markers: Vec<Marker>,
}

impl ChartSpec {
    fn validate(&self) -> Result<(), VizError> {
        if self.series.is_empty() || self.series.iter().all(|s| s.x.is_empty()) {
            return Err(VizError::EmptySeries);
        }
        for s in &self.series {
            if s.x.len() != s.y.len() {
                return Err(VizError::InvalidSpec(format!(
                    "series `{}` has {} x values and {} y values",
                    s.label,
                    s.x.len(),
                    s.y.len()
                )));
            }
        }
        if self.markers.iter().any(|m| !m.x.is_finite() || !m.y.is_finite()) {
            return Err(VizError::InvalidSpec("marker coordinates must be finite".into()));
        }
        Ok(())
    }
}

/// Data extent padded by 5% on each side; degenerate spans widen to ±0.5.
fn padded(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo == 0.0 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

pub fn render_chart(spec: &ChartSpec) -> Result<String, VizError> {
    spec.validate()?;
    let xs = spec.series.iter().flat_map(|s| s.x.iter().copied()).chain(spec.markers.iter().map(|m| m.x));
    let ys = spec.series.iter().flat_map(|s| s.y.iter().copied()).chain(spec.markers.iter().map(|m| m.y));
    let (x0, x1) = padded(xs);
    let (y0, y1) = padded(ys);
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = svg_open(W, H);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" font-size="18" text-anchor="middle">{}</text>"#,
        px(W / 2.0),
        escape(&spec.title)
    );
    let _ = writeln!(
        s,
        r##"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000000"/>"##,
        px(LEFT),
        px(TOP),
        px(pw),
        px(ph)
    );
    for k in 0..5 {
        let f = k as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let _ = writeln!(
            s,
            r#"<text class="xtick" x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            px(sx(xv)),
            px(TOP + ph + 18.0),
            tick_label(xv, x1 - x0)
        );
        let _ = writeln!(
            s,
            r#"<text class="ytick" x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            px(LEFT - 6.0),
            px(sy(yv) + 4.0),
            tick_label(yv, y1 - y0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        px(LEFT + pw / 2.0),
        px(H - 15.0),
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        px(TOP + ph / 2.0),
        px(TOP + ph / 2.0),
        escape(&spec.y_label)
    );

    for (n, series) in spec.series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let pts: Vec<String> = series
            .x
            .iter()
            .zip(&series.y)
            .map(|(&x, &y)| format!("{},{}", px(sx(x)), px(sy(y))))
            .collect();
        if pts.len() > 1 {
            let _ = writeln!(
                s,
                r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                pts.join(" ")
            );
        }
        for (&x, &y) in series.x.iter().zip(&series.y) {
            let _ = writeln!(
                s,
                r#"<circle class="point" cx="{}" cy="{}" r="3" fill="{color}"/>"#,
                px(sx(x)),
                px(sy(y))
            );
        }
        let _ = writeln!(
            s,
            r#"<text class="legend" x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            px(LEFT + 10.0),
            px(TOP + 16.0 + 16.0 * n as f64),
            escape(&series.label)
        );
    }

    // Markers come last so they sit above every series.
    for m in &spec.markers {
        let (cx, cy) = (sx(m.x), sy(m.y));
        match m.glyph {
            Glyph::Star => {
                let _ = writeln!(
                    s,
                    r##"<polygon class="marker-star" points="{}" fill="#e41a1c" stroke="#7f0000"/>"##,
                    star_points(cx, cy, 10.0)
                );
            }
            Glyph::Dot => {
                let _ = writeln!(
                    s,
                    r##"<circle class="marker-dot" cx="{}" cy="{}" r="5" fill="#e41a1c"/>"##,
                    px(cx),
                    px(cy)
                );
            }
            Glyph::Vline => {
                let _ = writeln!(
                    s,
                    r##"<line class="marker-vline" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#e41a1c" stroke-dasharray="4 3"/>"##,
                    px(TOP),
                    px(TOP + ph),
                    x = px(cx)
                );
            }
        }
        if !m.text.is_empty() {
            let _ = writeln!(
                s,
                r#"<text class="annotation" x="{}" y="{}" font-size="12">{}</text>"#,
                px(cx + 12.0),
                px(cy - 10.0),
                escape(&m.text)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn plot_cartesian_chart(spec: &ChartSpec, out: &Path) -> Result<PathBuf, VizError> {
    write_svg(out, &render_chart(spec)?)
}

/// Vertical bar chart with one labelled bar per entry.
pub fn render_bar_chart(title: &str, bars: &[(String, f64)]) -> Result<String, VizError> {
    if bars.is_empty() {
        return Err(VizError::EmptySeries);
    }
    let hi = bars.iter().map(|b| b.1).fold(0.0_f64, f64::max);
    let hi = if hi > 0.0 { hi * 1.05 } else { 1.0 };
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let slot = pw / bars.len() as f64;
    let mut s = svg_open(W, H);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" font-size="18" text-anchor="middle">{}</text>"#,
        px(W / 2.0),
        escape(title)
    );
    for (n, (label, v)) in bars.iter().enumerate() {
        let bh = v.max(0.0) / hi * ph;
        let x = LEFT + slot * n as f64 + slot * 0.15;
        let _ = writeln!(
            s,
            r#"<rect class="bar" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            px(x),
            px(TOP + ph - bh),
            px(slot * 0.7),
            px(bh),
            PALETTE[n % PALETTE.len()]
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            px(x + slot * 0.35),
            px(TOP + ph - bh - 4.0),
            tick_label(*v, hi)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            px(x + slot * 0.35),
            px(TOP + ph + 18.0),
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn plot_bar_chart(title: &str, bars: &[(String, f64)], out: &Path) -> Result<PathBuf, VizError> {
    write_svg(out, &render_bar_chart(title, bars)?)
}
