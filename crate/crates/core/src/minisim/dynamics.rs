//! Forward-Euler stepper on a colocated periodic grid.
//!
//! Every cell update reads only the previous state, so the row-parallel
//! evaluation below is value-identical to a sequential sweep.

use std::path::Path;

use rayon::prelude::*;

use super::dataset::{write_dataset, GridDataset, GridGeometry, VarInfo};
use super::namelist::SimConfig;
use super::SimError;

/// Prognostic variables, in state-file order.
pub const STATE_VARS: [(&str, &str); 8] = [
    ("h", "m"),
    ("u", "m s-1"),
    ("v", "m s-1"),
    ("qv", "kg kg-1"),
    ("tsk", "K"),
    ("smois", "1"),
    ("rainc", "mm"),
    ("rainnc", "mm"),
];

/// Diagnostic output variables, in dataset order.
pub const OUTPUT_VARS: [(&str, &str); 8] = [
    ("PSFC", "Pa"),
    ("U10", "m s-1"),
    ("V10", "m s-1"),
    ("T2", "K"),
    ("RAINC", "mm"),
    ("RAINNC", "mm"),
    ("SKINTEMP", "K"),
    ("SMOIS", "1"),
];

pub const PSFC_BASE: f64 = 101_325.0;
pub const PA_PER_METER: f64 = 100.0;
pub const COLD_POOL_K_PER_MM: f64 = 5.0;
pub const COLD_POOL_CLAMP_K: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub time: f64,
    pub grid: GridGeometry,
    pub h: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub qv: Vec<f64>,
    pub tsk: Vec<f64>,
    pub smois: Vec<f64>,
    pub rainc: Vec<f64>,
    pub rainnc: Vec<f64>,
}

impl GridState {
    fn fields(&self) -> [&Vec<f64>; 8] {
        [
            &self.h,
            &self.u,
            &self.v,
            &self.qv,
            &self.tsk,
            &self.smois,
            &self.rainc,
            &self.rainnc,
        ]
    }

    pub fn to_dataset(&self) -> GridDataset {
        let vars = STATE_VARS.iter().map(|(n, u)| VarInfo::new(n, u)).collect();
        let mut ds = GridDataset::new(self.grid, vars);
        ds.comment = "kind=state".into();
        ds.times.push(self.time);
        ds.data.push(self.fields().iter().map(|f| f.to_vec()).collect());
        ds
    }

    pub fn from_dataset(ds: &GridDataset) -> Result<Self, SimError> {
        let last = ds
            .n_times()
            .checked_sub(1)
            .ok_or_else(|| SimError::Parse("state file has no time block".into()))?;
        let get = |name: &str| -> Result<Vec<f64>, SimError> {
            ds.field(last, name)
                .map(<[f64]>::to_vec)
                .map_err(|_| SimError::Parse(format!("state file lacks `{name}`")))
        };
        Ok(Self {
            time: ds.times[last],
            grid: ds.grid,
            h: get("h")?,
            u: get("u")?,
            v: get("v")?,
            qv: get("qv")?,
            tsk: get("tsk")?,
            smois: get("smois")?,
            rainc: get("rainc")?,
            rainnc: get("rainnc")?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        Ok(write_dataset(path, &self.to_dataset())?)
    }

    fn first_non_finite(&self) -> Option<&'static str> {
        STATE_VARS
            .iter()
            .zip(self.fields())
            .find(|(_, f)| f.iter().any(|x| !x.is_finite()))
            .map(|((n, _), _)| *n)
    }
}

/// Precipitation rate for a given vapour content.
#[inline]
pub fn precip_rate(qv: f64, cfg: &SimConfig) -> f64 {
    (qv - cfg.q_crit).max(0.0) / cfg.tau_precip
}

/// Advances the state by one forward-Euler step.
pub fn step(state: &GridState, cfg: &SimConfig) -> Result<GridState, SimError> {
    let cfl = cfg.cfl();
    if cfl > 0.5 {
        return Err(SimError::CflViolation(cfl));
    }
    let (nx, ny) = (state.grid.nx, state.grid.ny);
    if nx != cfg.nx || ny != cfg.ny {
        return Err(SimError::Parse(format!(
            "state grid {nx}x{ny} does not match namelist {}x{}",
            cfg.nx, cfg.ny
        )));
    }
    let dt = cfg.dt;
    let inv_2dx = 1.0 / (2.0 * cfg.dx_m());
    let s = state;

    let cells: Vec<[f64; 7]> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (j, i) = (k / nx, k % nx);
            let e = j * nx + (i + 1) % nx;
            let w = j * nx + (i + nx - 1) % nx;
            let n = ((j + 1) % ny) * nx + i;
            let so = ((j + ny - 1) % ny) * nx + i;

            let dudx = (s.u[e] - s.u[w]) * inv_2dx;
            let dvdy = (s.v[n] - s.v[so]) * inv_2dx;
            let dhdx = (s.h[e] - s.h[w]) * inv_2dx;
            let dhdy = (s.h[n] - s.h[so]) * inv_2dx;

            let (h, u, v) = (s.h[k], s.u[k], s.v[k]);
            let tsk = s.tsk[k];
            let h1 = h + dt * (-cfg.h_amb * (dudx + dvdy) - cfg.alpha_heat * (tsk - cfg.tsk_ref));
            let u1 = u + dt * (cfg.f_coriolis * v - cfg.g * dhdx - cfg.kappa_drag * u);
            let v1 = v + dt * (-cfg.f_coriolis * u - cfg.g * dhdy - cfg.kappa_drag * v);

            let evap = cfg.c_evap * s.smois[k] * (tsk - cfg.tsk_ref).max(0.0);
            let precip = precip_rate(s.qv[k], cfg);
            let qv1 = s.qv[k] + dt * (evap - precip);
            let rainc1 = s.rainc[k] + dt * precip * cfg.conv_frac * 1000.0;
            let rainnc1 = s.rainnc[k] + dt * precip * (1.0 - cfg.conv_frac) * 1000.0;
            let tsk1 = if cfg.sst_update {
                tsk + dt * (cfg.tsk_ref - tsk) / (10.0 * dt)
            } else {
                tsk
            };
            [h1, u1, v1, qv1, tsk1, rainc1, rainnc1]
        })
        .collect();

    let pick = |c: usize| cells.iter().map(|x| x[c]).collect::<Vec<f64>>();
    Ok(GridState {
        time: s.time + dt,
        grid: s.grid,
        h: pick(0),
        u: pick(1),
        v: pick(2),
        qv: pick(3),
        tsk: if cfg.sst_update { pick(4) } else { s.tsk.clone() },
        smois: s.smois.clone(),
        rainc: pick(5),
        rainnc: pick(6),
    })
}

/// Output diagnostics of one state, in [`OUTPUT_VARS`] order.
pub fn diagnose(state: &GridState, cfg: &SimConfig) -> Vec<Vec<f64>> {
    let psfc = state
        .h
        .iter()
        .map(|h| PSFC_BASE + PA_PER_METER * (h - cfg.h_amb))
        .collect();
    let t2 = state
        .tsk
        .iter()
        .zip(&state.qv)
        .map(|(&tsk, &qv)| {
            let rain_mm = cfg.dt * precip_rate(qv, cfg) * 1000.0;
            tsk - (COLD_POOL_K_PER_MM * rain_mm).min(COLD_POOL_CLAMP_K)
        })
        .collect();
    vec![
        psfc,
        state.u.clone(),
        state.v.clone(),
        t2,
        state.rainc.clone(),
        state.rainnc.clone(),
        state.tsk.clone(),
        state.smois.clone(),
    ]
}

/// Runs `n_steps` steps, writing diagnostics every `output_interval` steps
/// (including t=0) to `out`. `slots` is the number of worker threads the
/// host can provide; the namelist's `nproc` must not exceed it.
pub fn run_simulation(
    cfg: &SimConfig,
    initial: &GridState,
    out: &Path,
    slots: usize,
) -> Result<GridDataset, SimError> {
    if cfg.nproc > slots {
        return Err(SimError::ParallelOverflow {
            requested: cfg.nproc,
            available: slots,
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.nproc)
        .build()
        .map_err(|e| SimError::Internal(format!("thread pool: {e}")))?;

    let vars = OUTPUT_VARS.iter().map(|(n, u)| VarInfo::new(n, u)).collect();
    let mut ds = GridDataset::new(initial.grid, vars);
    ds.comment = format!(
        "kind=output\nlsm_scheme={}\nmp_scheme={}\npbl_scheme={}\nsst_update={}",
        cfg.lsm_scheme, cfg.mp_scheme, cfg.pbl_scheme, cfg.sst_update as u8
    );
    ds.push_time(initial.time, diagnose(initial, cfg))?;

    let mut state = initial.clone();
    for n in 1..=cfg.n_steps {
        state = pool.install(|| step(&state, cfg))?;
        if let Some(var) = state.first_non_finite() {
            let dump = out.with_extension("dump.masd");
            state.save(&dump)?;
            return Err(SimError::NonFinite {
                step: n,
                var: var.to_string(),
                dump: dump.display().to_string(),
            });
        }
        if n % cfg.output_interval == 0 {
            ds.push_time(state.time, diagnose(&state, cfg))?;
        }
    }
    write_dataset(out, &ds)?;
    Ok(ds)
}
