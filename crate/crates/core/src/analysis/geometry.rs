//! Geometric masks, area statistics and radial profiles.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{distance_km, AnalysisError, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum Shape {
    Circle { lat: f64, lon: f64, radius_km: f64 },
    /// Inclusive lat/lon bounds.
    Box { lat0: f64, lat1: f64, lon0: f64, lon1: f64 },
}

impl Shape {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        match *self {
            Shape::Circle { lat: clat, lon: clon, radius_km } => distance_km(lat, lon, clat, clon) <= radius_km,
            Shape::Box { lat0, lat1, lon0, lon1 } => {
                lat >= lat0.min(lat1) && lat <= lat0.max(lat1) && lon >= lon0.min(lon1) && lon <= lon0.max(lon1)
            }
        }
    }
}

/// Masks every cell outside `shape`. Masked values become `NaN` and the
/// mask (combined with any existing one) travels with the tensor.
pub fn filter_by_geometry(t: &Tensor, shape: &Shape) -> Result<Tensor, AnalysisError> {
    let g = t.grid;
    let mask: Vec<bool> = (0..g.cells())
        .map(|k| t.is_valid(k) && shape.contains(g.lat(k / g.nx), g.lon(k % g.nx)))
        .collect();
    if !mask.iter().any(|&b| b) {
        return Err(AnalysisError::EmptyIntersection);
    }
    let n = g.cells();
    let values = t
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| if mask[k % n] { v } else { f64::NAN })
        .collect();
    Ok(Tensor {
        values,
        mask: Some(mask),
        ..t.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AreaStat {
    Mean,
    Min,
    Max,
}

impl std::str::FromStr for AreaStat {
    type Err = AnalysisError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(AreaStat::Mean),
            "min" => Ok(AreaStat::Min),
            "max" => Ok(AreaStat::Max),
            other => Err(AnalysisError::InvalidArgument(format!("unknown statistic {other}"))),
        }
    }
}

/// Statistic over unmasked cells (all time slices), summed in row-major order.
pub fn area_stat(t: &Tensor, stat: AreaStat) -> Result<f64, AnalysisError> {
    let n = t.cells();
    let mut count = 0usize;
    let mut sum = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (k, &v) in t.values.iter().enumerate() {
        if !t.is_valid(k % n) {
            continue;
        }
        count += 1;
        sum += v;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if count == 0 {
        return Err(AnalysisError::AllMasked);
    }
    Ok(match stat {
        AreaStat::Mean => sum / count as f64,
        AreaStat::Min => lo,
        AreaStat::Max => hi,
    })
}

/// Masked mean minus full-domain mean of the same field.
pub fn deficit(masked: &Tensor, full: &Tensor) -> Result<f64, AnalysisError> {
    let unmasked = Tensor { mask: None, ..full.clone() };
    Ok(area_stat(masked, AreaStat::Mean)? - area_stat(&unmasked, AreaStat::Mean)?)
}

/// Deficit of the region inside `shape` relative to the whole field.
pub fn cold_pool_deficit(field: &Tensor, shape: &Shape) -> Result<f64, AnalysisError> {
    deficit(&filter_by_geometry(field, shape)?, field)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileBin {
    pub bin: usize,
    pub center_km: f64,
    pub mean: f64,
    pub count: usize,
}

/// Mean value in equal-width distance bins around (`lat`, `lon`), over all
/// time slices. Cells at or beyond `r_max_km` are ignored; empty bins are
/// omitted from the result.
pub fn radial_profile(t: &Tensor, lat: f64, lon: f64, r_max_km: f64, n_bins: usize) -> Result<Vec<ProfileBin>, AnalysisError> {
    if r_max_km.is_nan() || r_max_km <= 0.0 || n_bins == 0 {
        return Err(AnalysisError::InvalidArgument(format!(
            "need r_max_km > 0 and n_bins >= 1, got {r_max_km} and {n_bins}"
        )));
    }
    let width = r_max_km / n_bins as f64;
    let g = t.grid;
    let n = g.cells();
    let bin_of: Vec<Option<usize>> = (0..n)
        .map(|k| {
            let d = distance_km(g.lat(k / g.nx), g.lon(k % g.nx), lat, lon);
            (d < r_max_km && t.is_valid(k)).then(|| ((d / width) as usize).min(n_bins - 1))
        })
        .collect();
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (k, &v) in t.values.iter().enumerate() {
        if let Some(b) = bin_of[k % n] {
            sums[b] += v;
            counts[b] += 1;
        }
    }
    let bins: Vec<ProfileBin> = (0..n_bins)
        .filter(|&b| counts[b] > 0)
        .map(|b| ProfileBin {
            bin: b,
            center_km: (b as f64 + 0.5) * width,
            mean: sums[b] / counts[b] as f64,
            count: counts[b],
        })
        .collect();
    if bins.is_empty() {
        return Err(AnalysisError::EmptyBinSetOnly);
    }
    Ok(bins)
}

pub fn profile_csv(bins: &[ProfileBin]) -> String {
    let mut s = String::from("bin,center_km,mean,count\n");
    for b in bins {
        let _ = writeln!(s, "{},{},{},{}", b.bin, b.center_km, b.mean, b.count);
    }
    s
}
