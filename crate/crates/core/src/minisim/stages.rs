//! Preprocessing, initialization and field perturbation stages.

use std::path::Path;

use super::dataset::{comment_attr, read_dataset, write_dataset, GridDataset, GridGeometry, VarInfo};
use super::dynamics::GridState;
use super::input::{discover_prefixes, parse_vtable, scan_inputs, InputField, VTABLE_NAME};
use super::namelist::{SimConfig, METERS_PER_DEGREE};
use super::SimError;

/// Merges `<prefix>.NNN` inputs into a single initial-condition dataset.
///
/// The variable table maps each input index to a variable name; the level
/// count shared by the inputs is recorded as `levels=N` in the comment.
pub fn preprocess(cfg: &SimConfig, input_dir: &Path) -> Result<GridDataset, SimError> {
    let vtable_path = input_dir.join(VTABLE_NAME);
    if !vtable_path.is_file() {
        return Err(SimError::MissingVariableTable(vtable_path.display().to_string()));
    }
    let vtable_text = std::fs::read_to_string(&vtable_path).map_err(|e| SimError::io(&vtable_path, e))?;
    let vtable = parse_vtable(&vtable_text)?;

    let files = scan_inputs(input_dir, &cfg.prefix)?;
    if files.is_empty() {
        let expected = discover_prefixes(input_dir)?.join(",");
        return Err(SimError::PrefixMismatch {
            found: cfg.prefix.clone(),
            expected: if expected.is_empty() { "<none>".into() } else { expected },
            dir: input_dir.display().to_string(),
        });
    }

    let grid = GridGeometry {
        nx: cfg.nx,
        ny: cfg.ny,
        ref_lat: cfg.ref_lat,
        ref_lon: cfg.ref_lon,
        d_deg: cfg.d_deg,
    };
    let mut levels: Option<u32> = None;
    let mut vars = Vec::new();
    let mut fields = Vec::new();
    for (idx, path) in &files {
        let entry = vtable
            .iter()
            .find(|e| e.index == *idx)
            .ok_or_else(|| SimError::Parse(format!("Vtable has no entry for input index {idx:03}")))?;
        let bytes = std::fs::read(path).map_err(|e| SimError::io(path, e))?;
        let field = InputField::from_bytes(&bytes, &path.display().to_string())?;
        if field.nx != cfg.nx || field.ny != cfg.ny {
            return Err(SimError::Parse(format!(
                "{}: grid {}x{} does not match namelist {}x{}",
                path.display(),
                field.nx,
                field.ny,
                cfg.nx,
                cfg.ny
            )));
        }
        match levels {
            None => levels = Some(field.levels),
            Some(l) if l != field.levels => {
                return Err(SimError::Parse(format!(
                    "{}: {} levels, previous inputs have {l}",
                    path.display(),
                    field.levels
                )))
            }
            _ => {}
        }
        vars.push(VarInfo::new(&entry.name, &entry.units));
        fields.push(field.values);
    }
    let mut ds = GridDataset::new(grid, vars);
    ds.comment = format!("kind=ic\nlevels={}\nsource={}", levels.unwrap_or(0), cfg.prefix);
    ds.push_time(0.0, fields)?;
    Ok(ds)
}

/// Level count recorded in an initial-condition dataset.
pub fn ic_levels(ic: &GridDataset) -> Result<u32, SimError> {
    comment_attr(&ic.comment, "levels")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| SimError::Parse("initial-condition file lacks `levels=` attribute".into()))
}

/// Builds the model state at t=0 from an initial-condition dataset.
pub fn real_init(cfg: &SimConfig, ic: &GridDataset) -> Result<GridState, SimError> {
    let levels = ic_levels(ic)?;
    if cfg.e_vert != levels {
        return Err(SimError::VerticalLevelMismatch {
            e_vert: cfg.e_vert,
            levels,
        });
    }
    let grid = ic.grid;
    if grid.nx != cfg.nx || grid.ny != cfg.ny {
        return Err(SimError::Parse(format!(
            "initial-condition grid {}x{} does not match namelist {}x{}",
            grid.nx, grid.ny, cfg.nx, cfg.ny
        )));
    }
    let field = |name: &str| -> Result<Vec<f64>, SimError> {
        ic.field(0, name)
            .map(<[f64]>::to_vec)
            .map_err(|_| SimError::Parse(format!("initial-condition file lacks {name}")))
    };
    let tsk = field("SKINTEMP")?;
    let smois = field("SMOIS")?;
    if smois.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(SimError::Parse("SMOIS outside [0,1]".into()));
    }

    let (nx, ny) = (grid.nx, grid.ny);
    let radius_km = cfg.vortex_radius_km;
    let h: Vec<f64> = (0..nx * ny)
        .map(|k| {
            let (j, i) = (k / nx, k % nx);
            let dlat = grid.lat(j) - cfg.vortex_lat;
            let dlon = grid.lon(i) - cfg.vortex_lon;
            let r2_km = (dlat * dlat + dlon * dlon) * (METERS_PER_DEGREE / 1000.0).powi(2);
            cfg.h_amb - cfg.vortex_amp * (-r2_km / (radius_km * radius_km)).exp()
        })
        .collect();

    let inv_2dx = 1.0 / (2.0 * cfg.dx_m());
    let g_over_f = if cfg.f_coriolis != 0.0 { cfg.g / cfg.f_coriolis } else { 0.0 };
    let mut u = vec![0.0; nx * ny];
    let mut v = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let dhdx = (h[j * nx + (i + 1) % nx] - h[j * nx + (i + nx - 1) % nx]) * inv_2dx;
            let dhdy = (h[((j + 1) % ny) * nx + i] - h[((j + ny - 1) % ny) * nx + i]) * inv_2dx;
            u[k] = -g_over_f * dhdy;
            v[k] = g_over_f * dhdx;
        }
    }

    Ok(GridState {
        time: 0.0,
        grid,
        h,
        u,
        v,
        qv: vec![cfg.qv0; nx * ny],
        tsk,
        smois,
        rainc: vec![0.0; nx * ny],
        rainnc: vec![0.0; nx * ny],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbOp {
    Add,
    Scale,
}

impl std::str::FromStr for PerturbOp {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "add" => Ok(PerturbOp::Add),
            "scale" => Ok(PerturbOp::Scale),
            other => Err(SimError::Parse(format!("unknown perturbation op `{other}`"))),
        }
    }
}

impl PerturbOp {
    pub fn name(self) -> &'static str {
        match self {
            PerturbOp::Add => "add",
            PerturbOp::Scale => "scale",
        }
    }
}

/// Applies `op value` to every time and cell of `var`, writing a new file.
pub fn perturb_field(input: &Path, output: &Path, var: &str, op: PerturbOp, value: f64) -> Result<GridDataset, SimError> {
    let mut ds = read_dataset(input)?;
    let idx = ds
        .var_index(var)
        .map_err(|_| SimError::UnknownVariable(var.to_string()))?;
    for block in &mut ds.data {
        for x in &mut block[idx] {
            *x = match op {
                PerturbOp::Add => *x + value,
                PerturbOp::Scale => *x * value,
            };
        }
    }
    if !ds.comment.is_empty() {
        ds.comment.push('\n');
    }
    ds.comment.push_str(&format!("perturb={var} {} {value:?}", op.name()));
    write_dataset(output, &ds)?;
    Ok(ds)
}
