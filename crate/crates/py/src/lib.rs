//! Python bindings: debate and verification runs, direct tool calls and
//! dataset inspection. Results come back as plain dicts and lists.
//!
//! Errors raise subclasses of `StormdeskError` that follow the CLI exit-code
//! families: `ConfigError` (2), `ProtocolError` (3), `ToolFailure` (4) and
//! `VerificationFailure` (5).

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde_json::Value;

use stormdesk_cli::{cmd_debate, cmd_verify, CliError, RunConfig};
use stormdesk_core::agent::AgentIdentity;
use stormdesk_core::analysis::{self, Extremum, RegionSel, TimeSel};
use stormdesk_core::debate::{DebateConfig, RetrievalConfig};
use stormdesk_core::minisim::cases::synthetic_typhoon_dataset;
use stormdesk_core::minisim::write_dataset;
use stormdesk_core::orchestrator::tools::{execute, Args};
use stormdesk_core::orchestrator::{select_mode as pick_mode, Blackboard, Mode, ModeTriggers, ToolContext, ToolRegistry};
use stormdesk_core::recovery::FailureClass;

create_exception!(stormdesk, StormdeskError, PyException);
create_exception!(stormdesk, ConfigError, StormdeskError);
create_exception!(stormdesk, ProtocolError, StormdeskError);
create_exception!(stormdesk, ToolFailure, StormdeskError);
create_exception!(stormdesk, VerificationFailure, StormdeskError);

fn raise(e: CliError) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        3 => ProtocolError::new_err(msg),
        4 => ToolFailure::new_err(msg),
        5 => VerificationFailure::new_err(msg),
        _ => ConfigError::new_err(msg),
    }
}

fn config_err(msg: impl ToString) -> PyErr {
    ConfigError::new_err(msg.to_string())
}

/// JSON text to Python objects through the stdlib decoder.
fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    json_to_py(py, &v.to_string())
}

fn run_config(
    workdir: PathBuf,
    backend: Option<String>,
    mode: Option<&str>,
    workers: usize,
    repair_budget: u32,
    seed: u64,
    inject: Vec<String>,
) -> PyResult<RunConfig> {
    if workers == 0 {
        return Err(config_err("workers must be at least 1"));
    }
    std::fs::create_dir_all(&workdir).map_err(|e| config_err(format!("{}: {e}", workdir.display())))?;
    Ok(RunConfig {
        workdir,
        backend,
        mode: mode.map(str::parse::<Mode>).transpose().map_err(config_err)?,
        repair_budget,
        workers,
        seed,
        inject: inject.iter().map(|c| c.parse::<FailureClass>()).collect::<Result<_, _>>().map_err(config_err)?,
    })
}

/// Runs a debate and writes its transcript, score CSV, score chart and
/// final hypothesis under `workdir`. `researchers` is a list of
/// `(name, expertise)` pairs in base speaking order.
#[pyfunction]
#[pyo3(signature = (topic, backend, workdir, rounds=6, researchers=None, corpus=None, k=2))]
#[allow(clippy::too_many_arguments)]
fn debate<'py>(
    py: Python<'py>,
    topic: &str,
    backend: String,
    workdir: PathBuf,
    rounds: u32,
    researchers: Option<Vec<(String, String)>>,
    corpus: Option<PathBuf>,
    k: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let people = researchers.unwrap_or_else(|| {
        [("Alice", "dynamics"), ("Bob", "synoptic steering"), ("Carol", "air-sea interaction")]
            .map(|(n, e)| (n.to_string(), e.to_string()))
            .to_vec()
    });
    let mut dc = DebateConfig::new(topic, people.iter().map(|(n, e)| AgentIdentity::researcher(n, e)).collect(), rounds);
    dc.retrieval = corpus.map(|d| RetrievalConfig { provider: format!("corpus:{}", d.display()), k });
    let cfg = run_config(workdir, Some(backend), None, 1, 0, 0, Vec::new())?;
    let out = py.detach(|| cmd_debate(&cfg, &dc)).map_err(raise)?;
    json_to_py(py, &out)
}

/// Verifies the goal in `goal_path` and writes the report under `workdir`.
#[pyfunction]
#[pyo3(signature = (goal_path, backend, workdir, mode=None, workers=2, repair_budget=3, seed=7, inject=Vec::new()))]
#[allow(clippy::too_many_arguments)]
fn verify<'py>(
    py: Python<'py>,
    goal_path: PathBuf,
    backend: String,
    workdir: PathBuf,
    mode: Option<&str>,
    workers: usize,
    repair_budget: u32,
    seed: u64,
    inject: Vec<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = run_config(workdir, Some(backend), mode, workers, repair_budget, seed, inject)?;
    let out = py.detach(|| cmd_verify(&cfg, &goal_path)).map_err(raise)?;
    json_to_py(py, &out)
}

/// Calls one registered tool in `workdir` with the given arguments.
#[pyfunction]
#[pyo3(signature = (workdir, name, args=None))]
fn run_tool<'py>(py: Python<'py>, workdir: PathBuf, name: &str, args: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyAny>> {
    let args: Args = match args {
        Some(d) => {
            let text: String = py.import("json")?.call_method1("dumps", (d,))?.extract()?;
            serde_json::from_str(&text).map_err(config_err)?
        }
        None => Args::new(),
    };
    let registry = ToolRegistry::standard();
    if registry.get(name).is_none() {
        return Err(ToolFailure::new_err(format!("unknown tool {name}")));
    }
    registry.validate(name, &args).map_err(|m| ToolFailure::new_err(format!("{name}: {m}")))?;
    let ctx = ToolContext::new(workdir);
    let out = py
        .detach(|| execute(&ctx, &mut Blackboard::default(), name, &args))
        .map_err(|m| ToolFailure::new_err(format!("{name} failed: {m}")))?;
    to_py(py, &out)
}

/// Header summary of a dataset file.
#[pyfunction]
fn inspect_dataset<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let info = analysis::inspect_dataset(path).map_err(|e| ToolFailure::new_err(e.to_string()))?;
    to_py(py, &serde_json::to_value(info).expect("info serializes"))
}

/// Values of `var` at time index `t`, row-major.
#[pyfunction]
fn read_field(path: PathBuf, var: &str, t: usize) -> PyResult<Vec<f64>> {
    let ds = stormdesk_core::minisim::read_dataset(path).map_err(|e| ToolFailure::new_err(e.to_string()))?;
    ds.field(t, var).map(<[f64]>::to_vec).map_err(|e| ToolFailure::new_err(e.to_string()))
}

/// Extremum of `var` per time as a list of feature-point dicts.
#[pyfunction]
#[pyo3(signature = (path, var, mode="min"))]
fn locate_feature<'py>(py: Python<'py>, path: PathBuf, var: &str, mode: &str) -> PyResult<Bound<'py, PyAny>> {
    let mode: Extremum = mode.parse().map_err(|e: analysis::AnalysisError| config_err(e))?;
    let t = analysis::ingest_tensor(path, var, TimeSel::All, RegionSel::All).map_err(|e| ToolFailure::new_err(e.to_string()))?;
    let pts = analysis::locate_feature(&t, mode).map_err(|e| ToolFailure::new_err(e.to_string()))?;
    to_py(py, &serde_json::to_value(pts).expect("points serialize"))
}

/// `"simple"` or `"complex"` for a request under the default triggers.
#[pyfunction]
fn select_mode(request: &str) -> &'static str {
    match pick_mode(request, None, &ModeTriggers::default()) {
        Mode::Simple => "simple",
        Mode::Complex => "complex",
    }
}

/// Writes the synthetic typhoon output dataset to `path`.
#[pyfunction]
fn write_typhoon_fixture(path: PathBuf) -> PyResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(config_err)?;
    }
    write_dataset(&path, &synthetic_typhoon_dataset()).map_err(config_err)
}

#[pymodule]
pub fn stormdesk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("StormdeskError", py.get_type::<StormdeskError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("ProtocolError", py.get_type::<ProtocolError>())?;
    m.add("ToolFailure", py.get_type::<ToolFailure>())?;
    m.add("VerificationFailure", py.get_type::<VerificationFailure>())?;
    m.add_function(wrap_pyfunction!(debate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_tool, m)?)?;
    m.add_function(wrap_pyfunction!(inspect_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(read_field, m)?)?;
    m.add_function(wrap_pyfunction!(locate_feature, m)?)?;
    m.add_function(wrap_pyfunction!(select_mode, m)?)?;
    m.add_function(wrap_pyfunction!(write_typhoon_fixture, m)?)?;
    Ok(())
}
