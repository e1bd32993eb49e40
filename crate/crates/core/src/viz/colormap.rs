use serde::{Deserialize, Serialize};

use super::VizError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Colormap {
    #[serde(rename = "diverging-bluered")]
    DivergingBlueRed,
    #[serde(rename = "sequential-precip")]
    SequentialPrecip,
    #[serde(rename = "sequential-gray")]
    SequentialGray,
}

const BLUERED: [[u8; 3]; 9] = [
    [33, 102, 172],
    [67, 147, 195],
    [146, 197, 222],
    [209, 229, 240],
    [247, 247, 247],
    [253, 219, 199],
    [244, 165, 130],
    [214, 96, 77],
    [178, 24, 43],
];

const PRECIP: [[u8; 3]; 9] = [
    [247, 252, 240],
    [224, 243, 219],
    [204, 235, 197],
    [168, 221, 181],
    [123, 204, 196],
    [78, 179, 211],
    [43, 140, 190],
    [8, 104, 172],
    [8, 64, 129],
];

const GRAY: [[u8; 3]; 9] = [
    [255, 255, 255],
    [223, 223, 223],
    [191, 191, 191],
    [159, 159, 159],
    [128, 128, 128],
    [96, 96, 96],
    [64, 64, 64],
    [32, 32, 32],
    [0, 0, 0],
];

/// Fill for masked or non-finite cells.
pub const MASKED_COLOR: [u8; 3] = [217, 217, 217];

impl Colormap {
    pub const NAMES: [&'static str; 3] = ["diverging-bluered", "sequential-precip", "sequential-gray"];

    pub fn from_name(name: &str) -> Result<Self, VizError> {
        match name {
            "diverging-bluered" => Ok(Colormap::DivergingBlueRed),
            "sequential-precip" => Ok(Colormap::SequentialPrecip),
            "sequential-gray" => Ok(Colormap::SequentialGray),
            other => Err(VizError::UnknownColormap(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Colormap::DivergingBlueRed => "diverging-bluered",
            Colormap::SequentialPrecip => "sequential-precip",
            Colormap::SequentialGray => "sequential-gray",
        }
    }

    pub fn stops(self) -> &'static [[u8; 3]; 9] {
        match self {
            Colormap::DivergingBlueRed => &BLUERED,
            Colormap::SequentialPrecip => &PRECIP,
            Colormap::SequentialGray => &GRAY,
        }
    }

    pub fn is_diverging(self) -> bool {
        matches!(self, Colormap::DivergingBlueRed)
    }

    /// Colour at `frac` in [0, 1], linearly interpolated between stops.
    pub fn color(self, frac: f64) -> [u8; 3] {
        let stops = self.stops();
        let pos = if frac.is_nan() { 0.0 } else { frac.clamp(0.0, 1.0) * 8.0 };
        let idx = (pos.floor() as usize).min(7);
        let t = pos - idx as f64;
        let (a, b) = (stops[idx], stops[idx + 1]);
        let mut out = [0u8; 3];
        for c in 0..3 {
            out[c] = (a[c] as f64 + (b[c] as f64 - a[c] as f64) * t).round() as u8;
        }
        out
    }

    /// Value range mapped onto the colour scale: symmetric about zero for
    /// diverging maps, data extent otherwise.
    pub fn range(self, lo: f64, hi: f64) -> (f64, f64) {
        if self.is_diverging() {
            let m = lo.abs().max(hi.abs());
            (-m, m)
        } else {
            (lo, hi)
        }
    }

    /// Colour of `v` under the range `(lo, hi)`; a degenerate range maps to
    /// the midpoint for diverging maps and the first stop otherwise.
    pub fn color_of(self, v: f64, lo: f64, hi: f64) -> [u8; 3] {
        if !v.is_finite() {
            return MASKED_COLOR;
        }
        if hi <= lo {
            return self.color(if self.is_diverging() { 0.5 } else { 0.0 });
        }
        self.color((v - lo) / (hi - lo))
    }
}

pub fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}
