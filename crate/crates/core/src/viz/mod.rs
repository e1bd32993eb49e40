//! Deterministic SVG rendering of time-series charts and gridded maps.
//!
//! All numbers are written with fixed decimal precision and elements are
//! emitted in a fixed order, so identical specs produce identical bytes.

pub mod chart;
pub mod colormap;
pub mod map;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use chart::{plot_bar_chart, plot_cartesian_chart, render_bar_chart, render_chart, ChartSpec, Glyph, Marker, Series};
pub use colormap::Colormap;
pub use map::{plot_spatial_map, render_map, MapSpec, Overlay};

#[derive(Debug, Error)]
pub enum VizError {
    #[error("chart has no series")]
    EmptySeries,
    #[error("unknown colormap `{0}`")]
    UnknownColormap(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
}

/// Coordinate formatting used for every geometric attribute.
pub(crate) fn px(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Tick label with a precision suited to the axis span.
pub(crate) fn tick_label(v: f64, span: f64) -> String {
    let decimals = if span > 0.0 {
        (3 - span.log10().floor() as i32).clamp(0, 8) as usize
    } else {
        3
    };
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

pub(crate) fn svg_open(w: f64, h: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
        w = px(w),
        h = px(h)
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##, px(w), px(h));
    s
}

/// Five-pointed star polygon points centred at (cx, cy).
pub(crate) fn star_points(cx: f64, cy: f64, r: f64) -> String {
    (0..10)
        .map(|k| {
            let radius = if k % 2 == 0 { r } else { r * 0.4 };
            let a = std::f64::consts::PI * (k as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
            format!("{},{}", px(cx + radius * a.cos()), px(cy + radius * a.sin()))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn write_svg(path: &Path, svg: &str) -> Result<PathBuf, VizError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| VizError::Io {
            path: parent.display().to_string(),
            msg: e.to_string(),
        })?;
    }
    std::fs::write(path, svg).map_err(|e| VizError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    Ok(path.to_path_buf())
}
