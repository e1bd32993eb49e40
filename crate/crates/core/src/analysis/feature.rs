//! Extremum location, time-step tracking and trajectory comparison.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ops::extremum;
use super::{distance_km, AnalysisError, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    fn is_max(self) -> bool {
        matches!(self, Extremum::Max)
    }
}

impl std::str::FromStr for Extremum {
    type Err = AnalysisError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "min" => Ok(Extremum::Min),
            "max" => Ok(Extremum::Max),
            other => Err(AnalysisError::InvalidArgument(format!("mode must be min or max, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeaturePoint {
    pub time_index: usize,
    pub time: f64,
    pub i: usize,
    pub j: usize,
    pub lat: f64,
    pub lon: f64,
    pub value: f64,
}

fn point(t: &Tensor, time_index: usize, cell: usize, value: f64) -> FeaturePoint {
    let (j, i) = (cell / t.grid.nx, cell % t.grid.nx);
    FeaturePoint {
        time_index,
        time: t.times[time_index],
        i,
        j,
        lat: t.grid.lat(j),
        lon: t.grid.lon(i),
        value,
    }
}

/// Global extremum of every time slice (a single point for 2D tensors).
pub fn locate_feature(t: &Tensor, mode: Extremum) -> Result<Vec<FeaturePoint>, AnalysisError> {
    if t.values.is_empty() || t.n_times() == 0 {
        return Err(AnalysisError::EmptyTensor);
    }
    (0..t.n_times())
        .map(|ti| {
            extremum(t.slice(ti), |k| t.is_valid(k), mode.is_max())
                .map(|(k, v)| point(t, ti, k, v))
                .ok_or(if t.valid_count() == 0 { AnalysisError::AllMasked } else { AnalysisError::EmptyTensor })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<FeaturePoint>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("time_index,time_s,i,j,lat,lon,value\n");
        for p in &self.points {
            let _ = writeln!(s, "{},{},{},{},{},{},{}", p.time_index, p.time, p.i, p.j, p.lat, p.lon, p.value);
        }
        s
    }
}

pub const DEFAULT_SEARCH_RADIUS_KM: f64 = 300.0;

/// Follows an extremum through time: the first time uses the global
/// extremum, later times only search within `radius_km` of the previous point.
pub fn track_feature(t: &Tensor, mode: Extremum, radius_km: f64) -> Result<Trajectory, AnalysisError> {
    if radius_km.is_nan() || radius_km <= 0.0 {
        return Err(AnalysisError::InvalidArgument(format!("search radius must be positive, got {radius_km}")));
    }
    let first = locate_feature(&t.at_time(0)?, mode)?[0];
    let mut points = vec![FeaturePoint { time_index: 0, time: t.times[0], ..first }];
    for ti in 1..t.n_times() {
        let prev = *points.last().expect("non-empty");
        let nx = t.grid.nx;
        let near = |k: usize| {
            t.is_valid(k) && distance_km(prev.lat, prev.lon, t.grid.lat(k / nx), t.grid.lon(k % nx)) <= radius_km
        };
        let (k, v) = extremum(t.slice(ti), near, mode.is_max()).ok_or(AnalysisError::LostFeature(ti))?;
        points.push(point(t, ti, k, v));
    }
    Ok(Trajectory { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackDelta {
    pub time_index: usize,
    pub time: f64,
    pub dlat: f64,
    pub dlon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackComparison {
    pub deltas: Vec<TrackDelta>,
    /// The delta with the largest |dlat|; first occurrence on ties.
    pub extreme: TrackDelta,
}

impl TrackComparison {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time_index,time_s,dlat,dlon\n");
        for d in &self.deltas {
            let _ = writeln!(s, "{},{},{},{}", d.time_index, d.time, d.dlat, d.dlon);
        }
        s
    }
}

/// Per-time displacement of `b` relative to `a`.
pub fn track_compare(a: &Trajectory, b: &Trajectory) -> Result<TrackComparison, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::TimeAxisMismatch(format!("{} vs {} points", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(AnalysisError::EmptyTensor);
    }
    let mut deltas = Vec::with_capacity(a.len());
    for (k, (pa, pb)) in a.points.iter().zip(&b.points).enumerate() {
        if pa.time != pb.time {
            return Err(AnalysisError::TimeAxisMismatch(format!(
                "point {k}: time {} vs {}",
                pa.time, pb.time
            )));
        }
        deltas.push(TrackDelta {
            time_index: k,
            time: pa.time,
            dlat: pb.lat - pa.lat,
            dlon: pb.lon - pa.lon,
        });
    }
    let mut extreme = deltas[0];
    for d in &deltas[1..] {
        if d.dlat.abs() > extreme.dlat.abs() {
            extreme = *d;
        }
    }
    Ok(TrackComparison { deltas, extreme })
}
