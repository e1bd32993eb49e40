//! Tool implementations. Every tool reads and writes workdir-relative
//! paths; tensors and other intermediate results live in the calling
//! worker's [`Blackboard`] under the names given by `as` arguments.

use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};
use std::sync::Mutex;

use serde_json::{json, Value};

use crate::analysis::{
    self, area_stat, filter_by_geometry, locate_feature, radial_profile, track_compare, track_feature, transform_tensor,
    AreaStat, Extremum, FeaturePoint, ProfileBin, RegionSel, Shape, Tensor, TimeSel, TrackComparison, TransformOp,
    Trajectory,
};
use crate::minisim::cases::{self, Case, VTABLE_GFS, VTABLE_LIBRARY_DIR};
use crate::minisim::{self, read_dataset, write_dataset, GridState, Namelist, PerturbOp, Value as NlValue};
use crate::recovery::{FailureClass, FaultPlan, IC_PATH, INPUTS_DIR, NAMELIST_PATH};
use crate::viz::{self, ChartSpec, Glyph, MapSpec, Marker, Overlay, Series};

pub type Args = BTreeMap<String, Value>;

/// Shared, thread-safe state of one session's workdir.
pub struct ToolContext {
    pub workdir: PathBuf,
    pub faults: FaultPlan,
    /// Held for every namelist read-modify-write.
    pub namelist_lock: Mutex<()>,
    /// The simulator is exclusive per workdir.
    pub sim_lock: Mutex<()>,
    /// Processor slots the host offers to one simulation.
    pub sim_slots: usize,
    pub seed: u64,
}

impl ToolContext {
    pub fn new(workdir: impl Into<PathBuf>) -> Self {
        Self {
            workdir: workdir.into(),
            faults: FaultPlan::default(),
            namelist_lock: Mutex::new(()),
            sim_lock: Mutex::new(()),
            sim_slots: 4,
            seed: 7,
        }
    }

    /// Resolves a workdir-relative path, refusing anything that escapes it.
    pub fn resolve(&self, rel: &str) -> Result<PathBuf, String> {
        let p = Path::new(rel);
        if p.is_absolute() || p.components().any(|c| matches!(c, Component::ParentDir | Component::Prefix(_))) {
            return Err(format!("path `{rel}` is outside the workdir"));
        }
        Ok(self.workdir.join(p))
    }

    pub fn output(&self, rel: &str) -> Result<PathBuf, String> {
        let p = self.resolve(rel)?;
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(|e| format!("io error on {}: {e}", parent.display()))?;
        }
        Ok(p)
    }

    /// Read-modify-write of a namelist key under the workdir lock.
    pub fn edit_namelist(&self, rel: &str, key: &str, value: NlValue) -> Result<(), String> {
        let path = self.resolve(rel)?;
        let _g = self.namelist_lock.lock().expect("namelist lock");
        let mut nl = Namelist::load(&path).map_err(|e| e.to_string())?;
        nl.set(key, value);
        nl.save(&path).map_err(|e| e.to_string())
    }

    fn config(&self, rel: &str) -> Result<minisim::SimConfig, String> {
        let path = self.resolve(rel)?;
        let _g = self.namelist_lock.lock().expect("namelist lock");
        let nl = Namelist::load(&path).map_err(|e| e.to_string())?;
        nl.config().map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone)]
pub enum Item {
    Tensor(Tensor),
    Features(Vec<FeaturePoint>),
    Trajectory(Trajectory),
    Comparison(TrackComparison),
    Profile(Vec<ProfileBin>),
    Scalar(f64),
}

/// Per-worker scratch space.
#[derive(Debug, Default, Clone)]
pub struct Blackboard {
    pub items: BTreeMap<String, Item>,
    /// Active time-axis realignment (axis, length) set by a repair.
    pub realign: Option<(String, usize)>,
}

impl Blackboard {
    fn tensor(&self, name: &str) -> Result<&Tensor, String> {
        match self.items.get(name) {
            Some(Item::Tensor(t)) => Ok(t),
            Some(_) => Err(format!("`{name}` is not a tensor")),
            None => Err(format!("no tensor named `{name}`")),
        }
    }

    fn points(&self, name: &str) -> Result<Vec<FeaturePoint>, String> {
        match self.items.get(name) {
            Some(Item::Features(f)) => Ok(f.clone()),
            Some(Item::Trajectory(t)) => Ok(t.points.clone()),
            Some(_) => Err(format!("`{name}` holds no feature points")),
            None => Err(format!("no features named `{name}`")),
        }
    }

    fn trajectory(&self, name: &str) -> Result<Trajectory, String> {
        self.points(name).map(|points| Trajectory { points })
    }
}

fn s<'a>(a: &'a Args, k: &str) -> Result<&'a str, String> {
    a.get(k).and_then(Value::as_str).ok_or_else(|| format!("missing string argument `{k}`"))
}

fn os<'a>(a: &'a Args, k: &str, default: &'a str) -> &'a str {
    a.get(k).and_then(Value::as_str).unwrap_or(default)
}

fn num(a: &Args, k: &str) -> Option<f64> {
    a.get(k).and_then(Value::as_f64)
}

fn int(a: &Args, k: &str) -> Option<usize> {
    a.get(k).and_then(Value::as_u64).map(|v| v as usize)
}

fn str_list(v: &Value) -> Vec<String> {
    match v {
        Value::String(x) => vec![x.clone()],
        Value::Array(xs) => xs.iter().filter_map(|x| x.as_str().map(str::to_string)).collect(),
        _ => vec![],
    }
}

fn time_sel(v: Option<&Value>) -> Result<TimeSel, String> {
    match v {
        None => Ok(TimeSel::All),
        Some(Value::String(x)) if x == "all" => Ok(TimeSel::All),
        Some(Value::String(x)) if x == "last" => Ok(TimeSel::Last),
        Some(Value::Number(n)) => n.as_u64().map(|i| TimeSel::Index { index: i as usize }).ok_or_else(|| "bad time index".into()),
        Some(obj @ Value::Object(_)) => {
            let start = obj.get("start").and_then(Value::as_u64).ok_or("time range needs start")?;
            let end = obj.get("end").and_then(Value::as_u64).ok_or("time range needs end")?;
            Ok(TimeSel::Range { start: start as usize, end: end as usize })
        }
        Some(other) => Err(format!("bad time selector {other}")),
    }
}

fn tensor_summary(t: &Tensor) -> Value {
    let dims: Vec<Value> = t.dims().iter().map(|(d, n)| json!([format!("{d:?}").to_lowercase(), n])).collect();
    let stats = |f: fn(f64, f64) -> f64, init: f64| {
        t.values.iter().copied().filter(|v| !v.is_nan()).fold(init, f)
    };
    json!({
        "name": t.name,
        "units": t.units,
        "dims": dims,
        "min": stats(f64::min, f64::INFINITY),
        "max": stats(f64::max, f64::NEG_INFINITY),
        "valid_cells": t.valid_count(),
    })
}

fn write_text(ctx: &ToolContext, rel: &str, text: &str) -> Result<PathBuf, String> {
    let p = ctx.output(rel)?;
    std::fs::write(&p, text).map_err(|e| format!("io error on {}: {e}", p.display()))?;
    Ok(p)
}

/// Runs tool `name`. Errors are plain messages, classified by the caller.
pub fn execute(ctx: &ToolContext, bb: &mut Blackboard, name: &str, a: &Args) -> Result<Value, String> {
    match name {
        "enter_easy_task_mode" => Ok(json!({"mode": "simple"})),
        "generate_response" => Ok(json!({"text": s(a, "text")?})),
        "rerun_stage" => Ok(json!({"stage": s(a, "stage")?})),

        "write_namelist" => {
            let case: Case = s(a, "case")?.parse().map_err(|e: minisim::SimError| e.to_string())?;
            let rel = os(a, "path", NAMELIST_PATH);
            let nl = Namelist::parse(case.namelist_text()).map_err(|e| e.to_string())?;
            let _g = ctx.namelist_lock.lock().expect("namelist lock");
            write_text(ctx, rel, &nl.to_string())?;
            Ok(json!({"artifact": rel}))
        }
        "edit_namelist" => {
            let key = s(a, "key")?;
            let token = match &a["value"] {
                Value::String(x) => x.clone(),
                other => other.to_string(),
            };
            let value = NlValue::parse(&token)?;
            ctx.edit_namelist(os(a, "path", NAMELIST_PATH), key, value.clone())?;
            Ok(json!({"key": key, "value": value.to_string()}))
        }
        "fetch_inputs" => {
            let case: Case = s(a, "case")?.parse().map_err(|e: minisim::SimError| e.to_string())?;
            let seed = a.get("seed").and_then(Value::as_u64).unwrap_or(ctx.seed);
            let dir = ctx.output(&format!("{}/", os(a, "dir", INPUTS_DIR)))?;
            cases::write_inputs(case, &dir, seed).map_err(|e| e.to_string())?;
            Ok(json!({"dir": os(a, "dir", INPUTS_DIR), "seed": seed}))
        }
        "link_vtable" | "relink_table" => {
            let default_table = format!("{INPUTS_DIR}/{VTABLE_LIBRARY_DIR}/{VTABLE_GFS}");
            let table = if name == "relink_table" { s(a, "path")?.to_string() } else { os(a, "table", &default_table).to_string() };
            let dir = ctx.resolve(os(a, "dir", INPUTS_DIR))?;
            cases::relink_table(&ctx.resolve(&table)?, &dir).map_err(|e| e.to_string())?;
            Ok(json!({"table": table}))
        }
        "preprocess" => {
            let nl_rel = os(a, "namelist", NAMELIST_PATH);
            let input_dir = ctx.resolve(os(a, "input_dir", INPUTS_DIR))?;
            for class in ctx.faults.take_for_site(name) {
                match class {
                    FailureClass::PrefixMismatch => ctx.edit_namelist(nl_rel, "prefix", NlValue::Str("FILE".into()))?,
                    FailureClass::MissingVariableTable => {
                        let _ = std::fs::remove_file(input_dir.join(minisim::input::VTABLE_NAME));
                    }
                    _ => {}
                }
            }
            let cfg = ctx.config(nl_rel)?;
            let ic = minisim::preprocess(&cfg, &input_dir).map_err(|e| e.to_string())?;
            let out = os(a, "out", IC_PATH);
            write_dataset(ctx.output(out)?, &ic).map_err(|e| e.to_string())?;
            Ok(json!({"artifact": out, "levels": minisim::stages::ic_levels(&ic).map_err(|e| e.to_string())?}))
        }
        "real_init" => {
            let nl_rel = os(a, "namelist", NAMELIST_PATH);
            if ctx.faults.take(FailureClass::VerticalLevelMismatch) {
                ctx.edit_namelist(nl_rel, "e_vert", NlValue::Int(32))?;
            }
            let cfg = ctx.config(nl_rel)?;
            let ic = read_dataset(ctx.resolve(os(a, "ic", IC_PATH))?).map_err(|e| e.to_string())?;
            let state = minisim::real_init(&cfg, &ic).map_err(|e| e.to_string())?;
            let out = os(a, "out", "sim/state.masd");
            state.save(ctx.output(out)?).map_err(|e| e.to_string())?;
            Ok(json!({"artifact": out}))
        }
        "run_simulation" => {
            let nl_rel = os(a, "namelist", NAMELIST_PATH);
            for class in ctx.faults.take_for_site(name) {
                match class {
                    FailureClass::ParallelOverflow => {
                        ctx.edit_namelist(nl_rel, "nproc", NlValue::Int(2 * ctx.sim_slots as i64))?
                    }
                    FailureClass::Unknown => return Err(minisim::SimError::Internal(name.into()).to_string()),
                    _ => {}
                }
            }
            let cfg = ctx.config(nl_rel)?;
            let state_ds = read_dataset(ctx.resolve(os(a, "state", "sim/state.masd"))?).map_err(|e| e.to_string())?;
            let state = GridState::from_dataset(&state_ds).map_err(|e| e.to_string())?;
            let out = os(a, "out", "sim/out.masd");
            let _g = ctx.sim_lock.lock().expect("sim lock");
            let ds = minisim::run_simulation(&cfg, &state, &ctx.output(out)?, ctx.sim_slots).map_err(|e| e.to_string())?;
            Ok(json!({"artifact": out, "n_times": ds.n_times()}))
        }
        "perturb_field" => {
            let op: PerturbOp = s(a, "op")?.parse().map_err(|e: minisim::SimError| e.to_string())?;
            let value = num(a, "value").ok_or("missing value")?;
            let out = s(a, "output")?;
            minisim::perturb_field(&ctx.resolve(s(a, "input")?)?, &ctx.output(out)?, s(a, "var")?, op, value)
                .map_err(|e| e.to_string())?;
            Ok(json!({"artifact": out}))
        }

        "inspect_dataset" => {
            let info = analysis::inspect_dataset(ctx.resolve(s(a, "path")?)?).map_err(|e| e.to_string())?;
            serde_json::to_value(info).map_err(|e| e.to_string())
        }
        "ingest_tensor" => {
            let vars = str_list(&a["var"]);
            let names = str_list(&a["as"]);
            if vars.len() != names.len() {
                return Err(format!("{} variables but {} names", vars.len(), names.len()));
            }
            let time = time_sel(a.get("time"))?;
            let region: RegionSel = match a.get("region") {
                Some(r) => serde_json::from_value(r.clone()).map_err(|e| format!("bad region: {e}"))?,
                None => RegionSel::All,
            };
            let ds = read_dataset(ctx.resolve(s(a, "path")?)?).map_err(|e| e.to_string())?;
            let mut out = Vec::new();
            for (k, (var, nm)) in vars.iter().zip(&names).enumerate() {
                let mut t = analysis::tensor::select(&ds, var, time, region).map_err(|e| e.to_string())?;
                if k == 0 && t.has_time_axis && t.n_times() >= 2 && ctx.faults.take(FailureClass::TensorDimMismatch) {
                    // Duplicate the trailing time slice, as a file appended twice would.
                    let n = t.n_times();
                    let step = t.times[n - 1] - t.times[n - 2];
                    t.times.push(t.times[n - 1] + step);
                    let last = t.slice(n - 1).to_vec();
                    t.values.extend(last);
                }
                out.push(tensor_summary(&t));
                bb.items.insert(nm.clone(), Item::Tensor(t));
            }
            Ok(Value::Array(out))
        }
        "transform_tensor" => {
            let op = match s(a, "op")? {
                "add" => TransformOp::Add { value: num(a, "value").ok_or("add needs value")? },
                "scale" => TransformOp::Scale { factor: num(a, "value").ok_or("scale needs value")? },
                "sum_pair" => TransformOp::SumPair,
                "divergence" => TransformOp::Divergence,
                "magnitude" => TransformOp::Magnitude,
                other => return Err(format!("unknown transform `{other}`")),
            };
            let mut inputs: Vec<Tensor> = str_list(&a["inputs"]).iter().map(|n| bb.tensor(n).cloned()).collect::<Result<_, _>>()?;
            if let Some((axis, len)) = &bb.realign {
                if axis == "time" {
                    inputs.iter_mut().for_each(|t| t.truncate_time(*len));
                }
            }
            let refs: Vec<&Tensor> = inputs.iter().collect();
            let t = transform_tensor(op, &refs).map_err(|e| e.to_string())?;
            let summary = tensor_summary(&t);
            bb.items.insert(s(a, "as")?.to_string(), Item::Tensor(t));
            Ok(summary)
        }
        "realign_tensor" => {
            let axis = s(a, "axis")?.to_string();
            let len = int(a, "target_len").ok_or("missing target_len")?;
            if axis != "time" {
                return Err(format!("cannot realign axis {axis}"));
            }
            for item in bb.items.values_mut() {
                if let Item::Tensor(t) = item {
                    t.truncate_time(len);
                }
            }
            bb.realign = Some((axis.clone(), len));
            Ok(json!({"axis": axis, "target_len": len}))
        }
        "locate_feature" => {
            let mode: Extremum = s(a, "mode")?.parse().map_err(|e: analysis::AnalysisError| e.to_string())?;
            let pts = locate_feature(bb.tensor(s(a, "tensor")?)?, mode).map_err(|e| e.to_string())?;
            let v = serde_json::to_value(&pts).map_err(|e| e.to_string())?;
            bb.items.insert(s(a, "as")?.to_string(), Item::Features(pts));
            Ok(v)
        }
        "track_feature" => {
            let mode: Extremum = s(a, "mode")?.parse().map_err(|e: analysis::AnalysisError| e.to_string())?;
            let radius = num(a, "radius_km").unwrap_or(analysis::feature::DEFAULT_SEARCH_RADIUS_KM);
            let tr = track_feature(bb.tensor(s(a, "tensor")?)?, mode, radius).map_err(|e| e.to_string())?;
            let v = json!({"points": tr.len(), "first": tr.points.first(), "last": tr.points.last()});
            bb.items.insert(s(a, "as")?.to_string(), Item::Trajectory(tr));
            Ok(v)
        }
        "track_compare" => {
            let c = track_compare(&bb.trajectory(s(a, "a")?)?, &bb.trajectory(s(a, "b")?)?).map_err(|e| e.to_string())?;
            let v = json!({"extreme": c.extreme});
            bb.items.insert(s(a, "as")?.to_string(), Item::Comparison(c));
            Ok(v)
        }
        "filter_by_geometry" => {
            let t = bb.tensor(s(a, "tensor")?)?;
            let shape: Shape = if let Some(sh) = a.get("shape") {
                serde_json::from_value(sh.clone()).map_err(|e| format!("bad shape: {e}"))?
            } else if let Some(f) = a.get("around").and_then(Value::as_str) {
                let p = *bb.points(f)?.first().ok_or("empty feature list")?;
                match (num(a, "radius_km"), num(a, "half_width_deg")) {
                    (Some(r), _) => Shape::Circle { lat: p.lat, lon: p.lon, radius_km: r },
                    (None, Some(w)) => Shape::Box { lat0: p.lat - w, lat1: p.lat + w, lon0: p.lon - w, lon1: p.lon + w },
                    _ => return Err("`around` needs radius_km or half_width_deg".into()),
                }
            } else {
                return Err("filter_by_geometry needs `shape` or `around`".into());
            };
            let m = filter_by_geometry(t, &shape).map_err(|e| e.to_string())?;
            let v = tensor_summary(&m);
            bb.items.insert(s(a, "as")?.to_string(), Item::Tensor(m));
            Ok(v)
        }
        "area_stat" => {
            let stat: AreaStat = s(a, "stat")?.parse().map_err(|e: analysis::AnalysisError| e.to_string())?;
            let v = area_stat(bb.tensor(s(a, "tensor")?)?, stat).map_err(|e| e.to_string())?;
            if let Some(n) = a.get("as").and_then(Value::as_str) {
                bb.items.insert(n.to_string(), Item::Scalar(v));
            }
            Ok(json!({"value": v}))
        }
        "deficit" => {
            let v = analysis::geometry::deficit(bb.tensor(s(a, "masked")?)?, bb.tensor(s(a, "full")?)?).map_err(|e| e.to_string())?;
            if let Some(n) = a.get("as").and_then(Value::as_str) {
                bb.items.insert(n.to_string(), Item::Scalar(v));
            }
            Ok(json!({"value": v}))
        }
        "radial_profile" => {
            let c = *bb.points(s(a, "center")?)?.first().ok_or("empty center feature")?;
            let n_bins = int(a, "n_bins").ok_or("missing n_bins")?;
            let bins = radial_profile(bb.tensor(s(a, "tensor")?)?, c.lat, c.lon, num(a, "r_max_km").unwrap_or(0.0), n_bins)
                .map_err(|e| e.to_string())?;
            let v = json!({"bins": bins.len()});
            bb.items.insert(s(a, "as")?.to_string(), Item::Profile(bins));
            Ok(v)
        }
        "export_csv" => {
            let nm = s(a, "name")?;
            let csv = match bb.items.get(nm) {
                Some(Item::Features(p)) => Trajectory { points: p.clone() }.to_csv(),
                Some(Item::Trajectory(t)) => t.to_csv(),
                Some(Item::Comparison(c)) => c.to_csv(),
                Some(Item::Profile(b)) => analysis::geometry::profile_csv(b),
                Some(Item::Scalar(x)) => format!("value\n{x}\n"),
                Some(Item::Tensor(_)) => return Err(format!("`{nm}` is a tensor; CSV export covers tables only")),
                None => return Err(format!("nothing named `{nm}`")),
            };
            let rel = s(a, "path")?;
            write_text(ctx, rel, &csv)?;
            Ok(json!({"artifact": rel}))
        }

        "plot_cartesian_chart" => {
            let pts = bb.points(s(a, "features")?)?;
            if pts.is_empty() {
                return Err("no points to plot".into());
            }
            let scale = num(a, "scale").unwrap_or(1.0);
            let decimals = int(a, "decimals").unwrap_or(3);
            let x: Vec<f64> = pts.iter().map(|p| p.time / 3600.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.value * scale).collect();
            let mut markers = Vec::new();
            if let Some(mark) = a.get("mark").and_then(Value::as_str) {
                let max = mark == "max";
                let (k, v) = analysis::ops::extremum(&y, |_| true, max).ok_or("no finite values")?;
                markers.push(Marker { x: x[k], y: v, glyph: Glyph::Star, text: format!("{v:.decimals$}") });
                markers.push(Marker { x: x[k], y: v, glyph: Glyph::Vline, text: String::new() });
            }
            let spec = ChartSpec {
                title: os(a, "title", "").into(),
                x_label: os(a, "x_label", "hours since start").into(),
                y_label: os(a, "y_label", "").into(),
                series: vec![Series { label: s(a, "features")?.into(), x, y }],
                markers,
            };
            let rel = s(a, "out")?;
            viz::plot_cartesian_chart(&spec, &ctx.output(rel)?).map_err(|e| e.to_string())?;
            Ok(json!({"artifact": rel, "marker": spec.markers.first().map(|m| m.text.clone())}))
        }
        "plot_spatial_map" => {
            let t = bb.tensor(s(a, "tensor")?)?;
            let mut field = t.at_time(int(a, "time_index").unwrap_or(0)).map_err(|e| e.to_string())?;
            let scale = num(a, "scale").unwrap_or(1.0);
            if scale != 1.0 {
                field.values.iter_mut().for_each(|v| *v *= scale);
            }
            let decimals = int(a, "decimals").unwrap_or(2);
            let mut overlays = Vec::new();
            if let Some(tr) = a.get("trajectory").and_then(Value::as_str) {
                overlays.push(Overlay::Trajectory { points: bb.points(tr)?.iter().map(|p| (p.lat, p.lon)).collect() });
            }
            if let Some(st) = a.get("star").and_then(Value::as_str) {
                let pts = bb.points(st)?;
                let vals: Vec<f64> = pts.iter().map(|p| p.value).collect();
                let (k, _) = analysis::ops::extremum(&vals, |_| true, os(a, "star_mode", "max") == "max").ok_or("empty star feature")?;
                let p = pts[k];
                overlays.push(Overlay::Star { lat: p.lat, lon: p.lon, label: format!("{:.decimals$}", p.value * scale) });
            }
            if let Some(rf) = a.get("rect_from").and_then(Value::as_str) {
                let m = bb.tensor(rf)?;
                let g = m.grid;
                let cells: Vec<usize> = (0..g.cells()).filter(|&k| m.is_valid(k)).collect();
                if cells.is_empty() {
                    return Err(format!("`{rf}` has no unmasked cells"));
                }
                let lats = cells.iter().map(|k| g.lat(k / g.nx));
                let lons = cells.iter().map(|k| g.lon(k % g.nx));
                let (la0, la1) = lats.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
                let (lo0, lo1) = lons.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
                let half = g.d_deg / 2.0;
                overlays.push(Overlay::Rectangle {
                    lat0: la0 - half,
                    lat1: la1 + half,
                    lon0: lo0 - half,
                    lon1: lo1 + half,
                    label: os(a, "rect_label", "").into(),
                });
            }
            let spec = MapSpec { title: os(a, "title", "").into(), field, colormap: s(a, "colormap")?.into(), overlays };
            let rel = s(a, "out")?;
            viz::plot_spatial_map(&spec, &ctx.output(rel)?).map_err(|e| e.to_string())?;
            Ok(json!({"artifact": rel}))
        }
        "plot_bar_chart" => {
            let labels = str_list(&a["labels"]);
            let values: Vec<f64> = a["values"].as_array().map(|v| v.iter().filter_map(Value::as_f64).collect()).unwrap_or_default();
            if labels.len() != values.len() {
                return Err("labels and values differ in length".into());
            }
            let bars: Vec<(String, f64)> = labels.into_iter().zip(values).collect();
            let rel = s(a, "out")?;
            viz::plot_bar_chart(os(a, "title", ""), &bars, &ctx.output(rel)?).map_err(|e| e.to_string())?;
            Ok(json!({"artifact": rel}))
        }

        "list_directory" => {
            let dir = ctx.resolve(s(a, "path")?)?;
            let mut names: Vec<String> = std::fs::read_dir(&dir)
                .map_err(|e| format!("io error on {}: {e}", dir.display()))?
                .filter_map(|e| e.ok())
                .map(|e| {
                    let n = e.file_name().to_string_lossy().into_owned();
                    if e.path().is_dir() { format!("{n}/") } else { n }
                })
                .collect();
            names.sort();
            Ok(json!({"entries": names}))
        }
        "read_file" => {
            let p = ctx.resolve(s(a, "path")?)?;
            let text = std::fs::read_to_string(&p).map_err(|e| format!("io error on {}: {e}", p.display()))?;
            let shown: String = text.chars().take(4096).collect();
            Ok(json!({"content": shown, "bytes": text.len()}))
        }
        "write_file" => {
            let rel = s(a, "path")?;
            write_text(ctx, rel, s(a, "content")?)?;
            Ok(json!({"artifact": rel}))
        }
        other => Err(format!("tool {other} has no implementation")),
    }
}
