//! Built-in experiment cases: namelist templates, raw input fields and a
//! synthetic typhoon output dataset used by the analysis tasks.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{GridDataset, GridGeometry, VarInfo};
use super::dynamics::OUTPUT_VARS;
use super::input::{InputField, VTABLE_NAME};
use super::namelist::METERS_PER_DEGREE;
use super::SimError;

pub const INPUT_LEVELS: u32 = 34;
pub const INPUT_PREFIX: &str = "GRIBFILE";
pub const VTABLE_LIBRARY_DIR: &str = "tables";
pub const VTABLE_GFS: &str = "Vtable.GFS";

const VTABLE_TEXT: &str = "\
# index  variable  units
000 SKINTEMP K
001 SMOIS 1
002 HGT m
";

const SQUALL_NAMELIST: &str = "\
&domain
  nx = 48,
  ny = 48,
  ref_lat = 30.0,
  ref_lon = 112.0,
  d_deg = 0.1,
  e_vert = 34,
/

&physics
  lsm_scheme = 'noahmp_toy',
  mp_scheme = 'thompson_toy',
  pbl_scheme = 'ysu_toy',
  sst_update = 0,
  f_coriolis = 7.3e-5,
  h_amb = 50.0,
  g = 9.81,
  q_crit = 0.016,
  tau_precip = 1800.0,
  alpha_heat = 0.0,
  tsk_ref = 300.0,
/

&run
  dt = 60.0,
  n_steps = 360,
  output_interval = 30,
  prefix = 'GRIBFILE',
  nproc = 4,
  qv0 = 0.015,
/
";

const TYPHOON_NAMELIST: &str = "\
&domain
  nx = 48,
  ny = 48,
  ref_lat = 15.0,
  ref_lon = 120.0,
  d_deg = 0.25,
  e_vert = 34,
/

&physics
  lsm_scheme = 'noahmp_toy',
  mp_scheme = 'thompson_toy',
  pbl_scheme = 'ysu_toy',
  sst_update = 0,
  f_coriolis = 5.0e-5,
  h_amb = 100.0,
  g = 9.81,
  kappa_drag = 2.0e-5,
  q_crit = 0.018,
  tau_precip = 3600.0,
  alpha_heat = 1.0e-4,
  tsk_ref = 300.0,
/

&run
  dt = 60.0,
  n_steps = 1440,
  output_interval = 120,
  prefix = 'GRIBFILE',
  nproc = 4,
  qv0 = 0.017,
  vortex_lat = 21.0,
  vortex_lon = 126.0,
  vortex_amp = 40.0,
  vortex_radius_km = 200.0,
/
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Squall,
    Typhoon,
}

impl std::str::FromStr for Case {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "squall" => Ok(Case::Squall),
            "typhoon" => Ok(Case::Typhoon),
            other => Err(SimError::Parse(format!("unknown case `{other}`"))),
        }
    }
}

pub fn squall_namelist_text() -> &'static str {
    SQUALL_NAMELIST
}

impl Case {
    pub fn namelist_text(self) -> &'static str {
        match self {
            Case::Squall => SQUALL_NAMELIST,
            Case::Typhoon => TYPHOON_NAMELIST,
        }
    }

    fn grid(self) -> GridGeometry {
        match self {
            Case::Squall => GridGeometry {
                nx: 48,
                ny: 48,
                ref_lat: 30.0,
                ref_lon: 112.0,
                d_deg: 0.1,
            },
            Case::Typhoon => GridGeometry {
                nx: 48,
                ny: 48,
                ref_lat: 15.0,
                ref_lon: 120.0,
                d_deg: 0.25,
            },
        }
    }

    /// `(SKINTEMP, SMOIS, HGT)` fields for the case.
    fn fields(self, seed: u64) -> [Vec<f64>; 3] {
        let g = self.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let km = METERS_PER_DEGREE / 1000.0;
        let mut tsk = Vec::with_capacity(g.cells());
        let mut smois = Vec::with_capacity(g.cells());
        let mut hgt = Vec::with_capacity(g.cells());
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (lat, lon) = (g.lat(j), g.lon(i));
                match self {
                    Case::Squall => {
                        // Moist soil strip along a SW-NE line through the domain centre.
                        let (clat, clon) = (g.lat(g.ny / 2), g.lon(g.nx / 2));
                        let across = ((lat - clat) - (lon - clon)) / std::f64::consts::SQRT_2 * km;
                        let strip = (-(across / 30.0).powi(2)).exp();
                        tsk.push(302.0 + 0.2 * strip + rng.gen_range(-0.02..0.02));
                        smois.push((0.75 * strip + rng.gen_range(0.0..0.005)).min(1.0));
                        hgt.push(50.0 + 20.0 * ((lon - g.ref_lon) / 4.8));
                    }
                    Case::Typhoon => {
                        let r2 = ((lat - 21.5).powi(2) + (lon - 126.5).powi(2)) * km * km;
                        tsk.push(299.7 + 1.5 * (-r2 / 300.0_f64.powi(2)).exp() + rng.gen_range(-0.02..0.02));
                        smois.push(0.0);
                        hgt.push(0.0);
                    }
                }
            }
        }
        [tsk, smois, hgt]
    }
}

/// Writes `GRIBFILE.000..002` and the variable-table library into `dir`.
pub fn write_inputs(case: Case, dir: &Path, seed: u64) -> Result<(), SimError> {
    let tables = dir.join(VTABLE_LIBRARY_DIR);
    std::fs::create_dir_all(&tables).map_err(|e| SimError::io(&tables, e))?;
    let g = case.grid();
    for (idx, values) in case.fields(seed).into_iter().enumerate() {
        let field = InputField {
            levels: INPUT_LEVELS,
            nx: g.nx,
            ny: g.ny,
            values,
        };
        let path = dir.join(format!("{INPUT_PREFIX}.{idx:03}"));
        std::fs::write(&path, field.to_bytes()).map_err(|e| SimError::io(&path, e))?;
    }
    let vt = tables.join(VTABLE_GFS);
    std::fs::write(&vt, VTABLE_TEXT).map_err(|e| SimError::io(&vt, e))
}

/// Copies the GFS table from the library into place as `dir/Vtable`.
pub fn link_vtable(dir: &Path) -> Result<(), SimError> {
    relink_table(&dir.join(VTABLE_LIBRARY_DIR).join(VTABLE_GFS), dir)
}

pub fn relink_table(table: &Path, dir: &Path) -> Result<(), SimError> {
    let target = dir.join(VTABLE_NAME);
    std::fs::copy(table, &target).map_err(|e| SimError::io(table, e))?;
    Ok(())
}

/// Central pressure (hPa) of the synthetic typhoon at each 6-hourly output.
pub const SYNTHETIC_CENTRAL_HPA: [f64; 13] = [
    990.0, 982.5, 975.0, 965.2, 951.8, 940.3, 930.1, 922.769, 926.4, 935.0, 948.7, 962.3, 975.9,
];
pub const SYNTHETIC_PEAK_INDEX: usize = 7;
pub const SYNTHETIC_RAIN_MAX_MM: f64 = 453.68;
pub const SYNTHETIC_DIV_MIN: f64 = -0.00287;
pub const SYNTHETIC_RAIN_CENTER: (usize, usize) = (30, 30);

/// Centre cell `(i, j)` of the synthetic typhoon at output `t`.
pub fn synthetic_center(t: usize) -> (usize, usize) {
    (44 - 2 * t, 12 + 2 * t)
}

/// A 13-time, 6-hourly typhoon output dataset with closed-form fields:
/// a north-westward moving vortex deepening to 922.769 hPa at output 7,
/// accumulated rain peaking at 453.68 mm, and 10-m winds whose
/// periodic centred-difference divergence reaches -0.00287 s-1 at the peak.
pub fn synthetic_typhoon_dataset() -> GridDataset {
    let grid = GridGeometry {
        nx: 64,
        ny: 64,
        ref_lat: 10.0,
        ref_lon: 110.0,
        d_deg: 0.25,
    };
    let km = METERS_PER_DEGREE / 1000.0;
    let dx_m = grid.d_deg * METERS_PER_DEGREE;
    let vars = OUTPUT_VARS.iter().map(|(n, u)| VarInfo::new(n, u)).collect();
    let mut ds = GridDataset::new(grid, vars);
    ds.comment = "kind=output\nsynthetic=typhoon".into();
    let (nx, ny) = (grid.nx, grid.ny);
    let dist_km = |i: usize, j: usize, ci: usize, cj: usize| {
        let dlat = grid.lat(j) - grid.lat(cj);
        let dlon = grid.lon(i) - grid.lon(ci);
        (dlat * dlat + dlon * dlon).sqrt() * km
    };

    for (t, &pc) in SYNTHETIC_CENTRAL_HPA.iter().enumerate() {
        let (ci, cj) = synthetic_center(t);
        let mut psfc = vec![0.0; nx * ny];
        let mut u0 = vec![0.0; nx * ny];
        let mut v0 = vec![0.0; nx * ny];
        let mut t2 = vec![0.0; nx * ny];
        let mut rainc = vec![0.0; nx * ny];
        let mut rainnc = vec![0.0; nx * ny];
        let frac = t as f64 / 12.0;
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let r = dist_km(i, j, ci, cj);
                let shape = (-(r / 150.0).powi(2)).exp();
                psfc[k] = if r == 0.0 { pc * 100.0 } else { 101_000.0 - (101_000.0 - pc * 100.0) * shape };
                let dxk = (grid.lon(i) - grid.lon(ci)) * km;
                let dyk = (grid.lat(j) - grid.lat(cj)) * km;
                // Counter-clockwise swirl plus inflow towards the centre.
                let profile = (-(r / 120.0).powi(2)).exp();
                u0[k] = (-dyk - 0.4 * dxk) * profile;
                v0[k] = (dxk - 0.4 * dyk) * profile;
                t2[k] = 301.0 + 2.5 * shape;
                let (ri, rj) = SYNTHETIC_RAIN_CENTER;
                let total = SYNTHETIC_RAIN_MAX_MM * (-(dist_km(i, j, ri, rj) / 90.0).powi(2)).exp() * frac;
                rainc[k] = 0.6 * total;
                rainnc[k] = total - rainc[k];
            }
        }
        let div0 = crate::analysis::ops::divergence_field(&u0, &v0, nx, ny, dx_m);
        let min0 = div0.iter().cloned().fold(f64::INFINITY, f64::min);
        let weight = (1010.0 - pc) / (1010.0 - SYNTHETIC_CENTRAL_HPA[SYNTHETIC_PEAK_INDEX]);
        let scale = SYNTHETIC_DIV_MIN * weight / min0;
        let u10: Vec<f64> = u0.iter().map(|x| x * scale).collect();
        let v10: Vec<f64> = v0.iter().map(|x| x * scale).collect();
        let skintemp: Vec<f64> = (0..nx * ny).map(|k| 300.0 + 0.02 * (k % nx) as f64).collect();
        let smois = vec![0.3; nx * ny];
        ds.push_time(
            t as f64 * 21_600.0,
            vec![psfc, u10, v10, t2, rainc, rainnc, skintemp, smois],
        )
        .expect("synthetic dataset is well-formed");
    }
    ds
}
