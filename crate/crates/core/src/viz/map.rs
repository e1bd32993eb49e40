//! Filled-cell maps with colour bar, lat/lon gridlines and overlays.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::colormap::{hex, Colormap};
use super::{escape, px, star_points, svg_open, tick_label, write_svg, VizError};
use crate::analysis::Tensor;

const PLOT: f64 = 560.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 50.0;
const BAR_GAP: f64 = 30.0;
const BAR_W: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Overlay {
    /// Polyline through (lat, lon) points.
    Trajectory { points: Vec<(f64, f64)> },
    Star {
        lat: f64,
        lon: f64,
        #[serde(default)]
        label: String,
    },
    Rectangle {
        lat0: f64,
        lat1: f64,
        lon0: f64,
        lon1: f64,
        #[serde(default)]
        label: String,
    },
}

/// A 2D field to render. A tensor with several time slices renders its
/// first slice.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub title: String,
    pub field: Tensor,
    pub colormap: String,
    pub overlays: Vec<Overlay>,
}

pub fn render_map(spec: &MapSpec) -> Result<String, VizError> {
    let cm = Colormap::from_name(&spec.colormap)?;
    let t = &spec.field;
    let g = t.grid;
    if g.cells() == 0 || t.values.len() < g.cells() {
        return Err(VizError::InvalidSpec("field is empty".into()));
    }
    let values = t.slice(0);
    let valid = |k: usize| t.is_valid(k) && values[k].is_finite();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, &v) in values.iter().enumerate() {
        if valid(k) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 0.0;
    }
    let (lo, hi) = cm.range(lo, hi);

    let cell = (PLOT / g.nx as f64).min(PLOT / g.ny as f64);
    let (pw, ph) = (cell * g.nx as f64, cell * g.ny as f64);
    let width = LEFT + pw + BAR_GAP + BAR_W + 80.0;
    let height = TOP + ph + 50.0;
    let half = g.d_deg / 2.0;
    let (lon_w, lon_e) = (g.lon(0) - half, g.lon(g.nx - 1) + half);
    let (lat_s, lat_n) = (g.lat(0) - half, g.lat(g.ny - 1) + half);
    let sx = |lon: f64| LEFT + (lon - lon_w) / (lon_e - lon_w) * pw;
    let sy = |lat: f64| TOP + (lat_n - lat) / (lat_n - lat_s) * ph;

    let mut s = svg_open(width, height);
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot-area"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath></defs>"#,
        px(LEFT),
        px(TOP),
        px(pw),
        px(ph)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" font-size="18" text-anchor="middle">{}</text>"#,
        px(LEFT + pw / 2.0),
        escape(&spec.title)
    );

    s.push_str("<g class=\"field\">\n");
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = j * g.nx + i;
            let color = if valid(k) { cm.color_of(values[k], lo, hi) } else { super::colormap::MASKED_COLOR };
            let _ = writeln!(
                s,
                r#"<rect class="cell" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                px(LEFT + i as f64 * cell),
                px(TOP + (g.ny - 1 - j) as f64 * cell),
                px(cell),
                px(cell),
                hex(color)
            );
        }
    }
    s.push_str("</g>\n");

    s.push_str("<g class=\"gridlines\" stroke=\"#555555\" stroke-width=\"0.5\" stroke-dasharray=\"2 2\">\n");
    for deg in (lon_w.ceil() as i64)..=(lon_e.floor() as i64) {
        let x = sx(deg as f64);
        let _ = writeln!(s, r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#, px(TOP), px(TOP + ph), x = px(x));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle" stroke="none">{deg}°E</text>"#,
            px(x),
            px(TOP + ph + 16.0)
        );
    }
    for deg in (lat_s.ceil() as i64)..=(lat_n.floor() as i64) {
        let y = sy(deg as f64);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}"/>"#, px(LEFT), px(LEFT + pw), y = px(y));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end" stroke="none">{deg}°N</text>"#,
            px(LEFT - 4.0),
            px(y + 4.0)
        );
    }
    s.push_str("</g>\n");

    s.push_str("<g class=\"overlays\" clip-path=\"url(#plot-area)\">\n");
    for o in &spec.overlays {
        match o {
            Overlay::Trajectory { points } => {
                let pts: Vec<String> = points.iter().map(|&(la, lo)| format!("{},{}", px(sx(lo)), px(sy(la)))).collect();
                let _ = writeln!(
                    s,
                    r##"<polyline class="overlay-trajectory" points="{}" fill="none" stroke="#000000" stroke-width="2"/>"##,
                    pts.join(" ")
                );
            }
            Overlay::Star { lat, lon, label } => {
                let (x, y) = (sx(*lon), sy(*lat));
                let _ = writeln!(
                    s,
                    r##"<g class="overlay-star"><polygon points="{}" fill="#ff0000" stroke="#000000" stroke-width="0.5"/><text x="{}" y="{}" font-size="12">{}</text></g>"##,
                    star_points(x, y, 9.0),
                    px(x + 10.0),
                    px(y - 8.0),
                    escape(label)
                );
            }
            Overlay::Rectangle { lat0, lat1, lon0, lon1, label } => {
                let (x0, x1) = (sx(lon0.min(*lon1)), sx(lon0.max(*lon1)));
                let (y0, y1) = (sy(lat0.max(*lat1)), sy(lat0.min(*lat1)));
                let _ = writeln!(
                    s,
                    r##"<g class="overlay-rect"><rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#ff0000" stroke-width="2"/><text x="{}" y="{}" font-size="12" fill="#ff0000">{}</text></g>"##,
                    px(x0),
                    px(y0),
                    px(x1 - x0),
                    px(y1 - y0),
                    px(x0),
                    px(y0 - 4.0),
                    escape(label)
                );
            }
        }
    }
    s.push_str("</g>\n");

    // Colour bar: the 9 stops as a gradient, 5 labelled ticks.
    let bx = LEFT + pw + BAR_GAP;
    s.push_str("<defs><linearGradient id=\"cbar\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">");
    for (n, c) in cm.stops().iter().enumerate() {
        let _ = write!(s, r#"<stop offset="{}" stop-color="{}"/>"#, px(n as f64 / 8.0), hex(*c));
    }
    s.push_str("</linearGradient></defs>\n");
    let _ = writeln!(
        s,
        r##"<rect class="colorbar" x="{}" y="{}" width="{}" height="{}" fill="url(#cbar)" stroke="#000000"/>"##,
        px(bx),
        px(TOP),
        px(BAR_W),
        px(ph)
    );
    for k in 0..5 {
        let f = k as f64 / 4.0;
        let v = lo + f * (hi - lo);
        let _ = writeln!(
            s,
            r#"<text class="cbar-tick" x="{}" y="{}" font-size="11">{}</text>"#,
            px(bx + BAR_W + 4.0),
            px(TOP + ph - f * ph + 4.0),
            tick_label(v, hi - lo)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="11">{}</text>"#,
        px(bx),
        px(TOP - 8.0),
        escape(&t.units)
    );
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn plot_spatial_map(spec: &MapSpec, out: &Path) -> Result<PathBuf, VizError> {
    write_svg(out, &render_map(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minisim::GridGeometry;

    fn field(values: Vec<f64>) -> Tensor {
        let g = GridGeometry { nx: 6, ny: 5, ref_lat: 20.0, ref_lon: 118.0, d_deg: 0.5 };
        Tensor::from_field("RAIN", "mm", g, 0.0, values)
    }

    #[test]
    fn cell_count_and_overlays() {
        let mut v = vec![1.0; 30];
        v[13] = 453.68;
        let spec = MapSpec {
            title: "precip".into(),
            field: field(v),
            colormap: "sequential-precip".into(),
            overlays: vec![
                Overlay::Star { lat: 21.0, lon: 118.5, label: "453.68".into() },
                Overlay::Trajectory { points: vec![(20.0, 118.0), (30.0, 140.0)] },
                Overlay::Rectangle { lat0: 20.0, lat1: 21.0, lon0: 118.0, lon1: 119.0, label: String::new() },
            ],
        };
        let svg = render_map(&spec).unwrap();
        assert_eq!(svg.matches("class=\"cell\"").count(), 30);
        assert_eq!(svg.matches("class=\"overlay-star\"").count(), 1);
        assert_eq!(svg.matches("class=\"overlay-trajectory\"").count(), 1);
        assert_eq!(svg.matches("class=\"overlay-rect\"").count(), 1);
        assert_eq!(svg.matches("class=\"cbar-tick\"").count(), 5);
        assert!(svg.contains(">453.68</text>"));
        assert!(svg.contains("fill=\"#ff0000\""));
        assert!(svg.contains("120°E"));
        assert_eq!(svg, render_map(&spec).unwrap());
    }

    #[test]
    fn zero_field_is_midpoint() {
        let spec = MapSpec {
            title: String::new(),
            field: field(vec![0.0; 30]),
            colormap: "diverging-bluered".into(),
            overlays: vec![],
        };
        let svg = render_map(&spec).unwrap();
        assert_eq!(svg.matches("fill=\"#f7f7f7\"").count(), 30);
        let bad = MapSpec { colormap: "rainbow".into(), ..spec };
        assert!(matches!(render_map(&bad), Err(VizError::UnknownColormap(_))));
    }
}
