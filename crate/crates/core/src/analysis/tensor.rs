use std::path::Path;

use serde::Serialize;

use super::AnalysisError;
use crate::minisim::dataset::{read_dataset, read_header, GridDataset, GridGeometry, VarInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dim {
    Time,
    Y,
    X,
}

/// A (time, y, x) or (y, x) slab of one variable with its coordinates.
///
/// `grid` describes the horizontal sub-region actually held. For 2D tensors
/// `times` still carries the single selected time. The optional `mask` is per
/// horizontal cell (`true` = valid) and applies to every time slice; masked
/// values hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub units: String,
    pub grid: GridGeometry,
    pub times: Vec<f64>,
    pub has_time_axis: bool,
    pub values: Vec<f64>,
    pub mask: Option<Vec<bool>>,
}

impl Tensor {
    pub fn from_field(name: &str, units: &str, grid: GridGeometry, time: f64, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.cells(), "field length must match grid");
        Self {
            name: name.to_string(),
            units: units.to_string(),
            grid,
            times: vec![time],
            has_time_axis: false,
            values,
            mask: None,
        }
    }

    pub fn dims(&self) -> Vec<(Dim, usize)> {
        let mut d = Vec::with_capacity(3);
        if self.has_time_axis {
            d.push((Dim::Time, self.times.len()));
        }
        d.push((Dim::Y, self.grid.ny));
        d.push((Dim::X, self.grid.nx));
        d
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn cells(&self) -> usize {
        self.grid.cells()
    }

    pub fn lats(&self) -> Vec<f64> {
        (0..self.grid.ny).map(|j| self.grid.lat(j)).collect()
    }

    pub fn lons(&self) -> Vec<f64> {
        (0..self.grid.nx).map(|i| self.grid.lon(i)).collect()
    }

    /// Horizontal slice at time index `t`.
    pub fn slice(&self, t: usize) -> &[f64] {
        let n = self.cells();
        &self.values[t * n..(t + 1) * n]
    }

    /// 2D tensor holding time slice `t`.
    pub fn at_time(&self, t: usize) -> Result<Tensor, AnalysisError> {
        if t >= self.n_times() {
            return Err(AnalysisError::OutOfBounds(format!(
                "time index {t} >= {}",
                self.n_times()
            )));
        }
        Ok(Tensor {
            times: vec![self.times[t]],
            has_time_axis: false,
            values: self.slice(t).to_vec(),
            ..self.clone()
        })
    }

    pub fn is_valid(&self, cell: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[cell])
    }

    pub fn valid_count(&self) -> usize {
        self.mask
            .as_ref()
            .map_or(self.cells(), |m| m.iter().filter(|&&b| b).count())
    }

    /// Keeps the first `len` time slices.
    pub fn truncate_time(&mut self, len: usize) {
        if len < self.n_times() {
            self.times.truncate(len);
            self.values.truncate(len * self.cells());
        }
    }

    /// Serializes as a one-variable dataset (with mask block when masked).
    pub fn to_dataset(&self) -> GridDataset {
        let mut ds = GridDataset::new(self.grid, vec![VarInfo::new(&self.name, &self.units)]);
        ds.comment = "kind=tensor".into();
        ds.mask = self.mask.clone();
        for t in 0..self.n_times() {
            ds.times.push(self.times[t]);
            ds.data.push(vec![self.slice(t).to_vec()]);
        }
        ds
    }

    pub fn from_dataset(ds: &GridDataset, var: &str) -> Result<Tensor, AnalysisError> {
        let v = ds.var_index(var).map_err(|_| AnalysisError::UnknownVariable(var.to_string()))?;
        let mut values = Vec::with_capacity(ds.n_times() * ds.grid.cells());
        for blk in &ds.data {
            values.extend_from_slice(&blk[v]);
        }
        Ok(Tensor {
            name: ds.vars[v].name.clone(),
            units: ds.vars[v].units.clone(),
            grid: ds.grid,
            times: ds.times.clone(),
            has_time_axis: true,
            values,
            mask: ds.mask.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Deserialize, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TimeSel {
    #[default]
    All,
    /// A single time; yields a 2D tensor.
    Index { index: usize },
    /// Half-open range of time indices.
    Range { start: usize, end: usize },
    /// The final time; yields a 2D tensor.
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Deserialize, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegionSel {
    #[default]
    All,
    /// Half-open cell index ranges.
    Cells { i0: usize, i1: usize, j0: usize, j1: usize },
    /// Inclusive lat/lon bounds, snapped to the cells whose centres fall inside.
    LatLon { lat0: f64, lat1: f64, lon0: f64, lon1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub vars: Vec<VarInfo>,
    pub nx: usize,
    pub ny: usize,
    pub n_times: usize,
    pub time_start: f64,
    pub time_end: f64,
    pub lat_range: (f64, f64),
    pub lon_range: (f64, f64),
    pub comment: String,
}

/// Header-only metadata query.
pub fn inspect_dataset(path: impl AsRef<Path>) -> Result<DatasetInfo, AnalysisError> {
    let h = read_header(path)?;
    let g = h.grid;
    Ok(DatasetInfo {
        nx: g.nx,
        ny: g.ny,
        n_times: h.times.len(),
        time_start: h.times.first().copied().unwrap_or(0.0),
        time_end: h.times.last().copied().unwrap_or(0.0),
        lat_range: (g.lat(0), g.lat(g.ny.saturating_sub(1))),
        lon_range: (g.lon(0), g.lon(g.nx.saturating_sub(1))),
        vars: h.vars,
        comment: h.comment,
    })
}

pub fn ingest_tensor(path: impl AsRef<Path>, var: &str, time: TimeSel, region: RegionSel) -> Result<Tensor, AnalysisError> {
    let ds = read_dataset(path)?;
    select(&ds, var, time, region)
}

/// Selection over an in-memory dataset.
pub fn select(ds: &GridDataset, var: &str, time: TimeSel, region: RegionSel) -> Result<Tensor, AnalysisError> {
    let v = ds.var_index(var).map_err(|_| AnalysisError::UnknownVariable(var.to_string()))?;
    let nt = ds.n_times();
    if nt == 0 {
        return Err(AnalysisError::EmptyTensor);
    }
    let oob = |m: String| AnalysisError::OutOfBounds(m);
    let (t0, t1, keep_axis) = match time {
        TimeSel::All => (0, nt, true),
        TimeSel::Index { index } if index < nt => (index, index + 1, false),
        TimeSel::Index { index } => return Err(oob(format!("time index {index} >= {nt}"))),
        TimeSel::Range { start, end } if start < end && end <= nt => (start, end, true),
        TimeSel::Range { start, end } => return Err(oob(format!("time range {start}..{end} outside 0..{nt}"))),
        TimeSel::Last => (nt - 1, nt, false),
    };
    let g = ds.grid;
    let (i0, i1, j0, j1) = match region {
        RegionSel::All => (0, g.nx, 0, g.ny),
        RegionSel::Cells { i0, i1, j0, j1 } => {
            if i0 >= i1 || j0 >= j1 || i1 > g.nx || j1 > g.ny {
                return Err(oob(format!("cell box [{i0},{i1})x[{j0},{j1}) outside {}x{}", g.nx, g.ny)));
            }
            (i0, i1, j0, j1)
        }
        RegionSel::LatLon { lat0, lat1, lon0, lon1 } => {
            let is: Vec<usize> = (0..g.nx).filter(|&i| (lon0..=lon1).contains(&g.lon(i))).collect();
            let js: Vec<usize> = (0..g.ny).filter(|&j| (lat0..=lat1).contains(&g.lat(j))).collect();
            match (is.first(), is.last(), js.first(), js.last()) {
                (Some(&a), Some(&b), Some(&c), Some(&d)) => (a, b + 1, c, d + 1),
                _ => return Err(oob("lat/lon box selects no cells".into())),
            }
        }
    };
    let sub = GridGeometry {
        nx: i1 - i0,
        ny: j1 - j0,
        ref_lat: g.lat(j0),
        ref_lon: g.lon(i0),
        d_deg: g.d_deg,
    };
    let mut values = Vec::with_capacity((t1 - t0) * sub.cells());
    for t in t0..t1 {
        let field = &ds.data[t][v];
        for j in j0..j1 {
            values.extend_from_slice(&field[j * g.nx + i0..j * g.nx + i1]);
        }
    }
    let mask = ds.mask.as_ref().map(|m| {
        (j0..j1)
            .flat_map(|j| (i0..i1).map(move |i| (j, i)))
            .map(|(j, i)| m[j * g.nx + i])
            .collect()
    });
    Ok(Tensor {
        name: ds.vars[v].name.clone(),
        units: ds.vars[v].units.clone(),
        grid: sub,
        times: ds.times[t0..t1].to_vec(),
        has_time_axis: keep_axis,
        values,
        mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minisim::cases::synthetic_typhoon_dataset;
    use crate::minisim::write_dataset;

    #[test]
    fn inspect_reports_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.masd");
        write_dataset(&p, &synthetic_typhoon_dataset()).unwrap();
        let info = inspect_dataset(&p).unwrap();
        let names: Vec<&str> = info.vars.iter().map(|v| v.name.as_str()).collect();
        for v in ["PSFC", "U10", "V10", "RAINC", "RAINNC"] {
            assert!(names.contains(&v));
        }
        assert_eq!(info.n_times, 13);
        assert_eq!(info.time_start, 0.0);
        assert_eq!(info.time_end, 12.0 * 21_600.0);
        assert!(inspect_dataset(dir.path()).is_err());
    }

    #[test]
    fn selections() {
        let ds = synthetic_typhoon_dataset();
        let all = select(&ds, "PSFC", TimeSel::All, RegionSel::All).unwrap();
        assert_eq!(all.dims(), vec![(Dim::Time, 13), (Dim::Y, 64), (Dim::X, 64)]);
        let one = select(&ds, "U10", TimeSel::Index { index: 0 }, RegionSel::All).unwrap();
        assert_eq!(one.dims(), vec![(Dim::Y, 64), (Dim::X, 64)]);
        assert_eq!(one.values, ds.field(0, "U10").unwrap());
        assert!(matches!(
            select(&ds, "PSFC", TimeSel::Index { index: 13 }, RegionSel::All),
            Err(AnalysisError::OutOfBounds(_))
        ));
        assert!(matches!(
            select(&ds, "NOPE", TimeSel::All, RegionSel::All),
            Err(AnalysisError::UnknownVariable(_))
        ));
        let boxed = select(&ds, "T2", TimeSel::Last, RegionSel::Cells { i0: 2, i1: 5, j0: 1, j1: 3 }).unwrap();
        assert_eq!(boxed.values.len(), 6);
        assert_eq!(boxed.values[0], ds.field(12, "T2").unwrap()[64 + 2]);
        assert_eq!(boxed.grid.ref_lat, ds.grid.lat(1));
        let ll = select(&ds, "T2", TimeSel::Last, RegionSel::LatLon { lat0: 10.2, lat1: 10.6, lon0: 110.0, lon1: 110.3 }).unwrap();
        assert_eq!((ll.grid.nx, ll.grid.ny), (2, 2));
    }

    #[test]
    fn masked_tensor_roundtrip() {
        let ds = synthetic_typhoon_dataset();
        let mut t = select(&ds, "T2", TimeSel::Index { index: 3 }, RegionSel::All).unwrap();
        let mut mask = vec![true; t.cells()];
        mask[5] = false;
        t.values[5] = f64::NAN;
        t.mask = Some(mask);
        let back = Tensor::from_dataset(&GridDataset::from_bytes(&t.to_dataset().to_bytes().unwrap()).unwrap(), "T2").unwrap();
        assert_eq!(back.mask, t.mask);
        assert!(back.values[5].is_nan());
        assert_eq!(back.values[6], t.values[6]);
    }
}
