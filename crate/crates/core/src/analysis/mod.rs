//! Spatiotemporal tensor analysis: ingest, transforms, feature location and
//! tracking, geometric masks, area statistics, radial profiles and track
//! comparison over gridded datasets.
//!
//! Distances use an equirectangular approximation at 111 km per degree with
//! no latitude cosine, matching the simulator's grid spacing. Extremum ties
//! always resolve to the smallest row-major index.

pub mod feature;
pub mod geometry;
pub mod ops;
pub mod tensor;

use thiserror::Error;

use crate::minisim::DatasetError;

pub use feature::{locate_feature, track_compare, track_feature, Extremum, FeaturePoint, TrackComparison, TrackDelta, Trajectory};
pub use geometry::{area_stat, cold_pool_deficit, filter_by_geometry, radial_profile, AreaStat, ProfileBin, Shape};
pub use ops::{transform_tensor, TransformOp};
pub use tensor::{ingest_tensor, inspect_dataset, DatasetInfo, RegionSel, Tensor, TimeSel};

pub const KM_PER_DEGREE: f64 = 111.0;

/// Equirectangular distance in km between two lat/lon points.
pub fn distance_km(lat_a: f64, lon_a: f64, lat_b: f64, lon_b: f64) -> f64 {
    let dlat = lat_a - lat_b;
    let dlon = lon_a - lon_b;
    (dlat * dlat + dlon * dlon).sqrt() * KM_PER_DEGREE
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("out of bounds: {0}")]
    OutOfBounds(String),
    #[error("shape mismatch: length {left} vs {right} on axis {axis}")]
    ShapeMismatch { axis: &'static str, left: usize, right: usize },
    #[error("empty tensor")]
    EmptyTensor,
    #[error("lost feature at time index {0}: no cell within search radius")]
    LostFeature(usize),
    #[error("geometry does not intersect the grid")]
    EmptyIntersection,
    #[error("all cells are masked")]
    AllMasked,
    #[error("every radial bin is empty")]
    EmptyBinSetOnly,
    #[error("time axis mismatch: {0}")]
    TimeAxisMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}
