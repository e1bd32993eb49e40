//! Shared helpers for the integration tests.
#![allow(dead_code)]

pub mod oracles;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use stormdesk_core::agent::{load_script, ScriptedBackend};
use stormdesk_core::minisim::cases::synthetic_typhoon_dataset;
use stormdesk_core::minisim::write_dataset;
use stormdesk_core::orchestrator::{Engine, EngineConfig, ToolContext};
use stormdesk_core::recovery::FaultPlan;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn scenario(name: &str) -> Arc<ScriptedBackend> {
    let path = fixtures().join("scenarios").join(format!("{name}.json"));
    Arc::new(ScriptedBackend::new(load_script(path).expect("fixture scenario loads")))
}

pub fn goal(name: &str) -> String {
    std::fs::read_to_string(fixtures().join("goals").join(name)).expect("goal fixture")
}

/// Workdir holding the synthetic typhoon output the simple-mode tasks read.
pub fn typhoon_workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("sim")).unwrap();
    write_dataset(dir.path().join("sim/typhoon_output.masd"), &synthetic_typhoon_dataset()).unwrap();
    dir
}

pub fn engine(name: &str, workdir: &Path, faults: FaultPlan, cfg: EngineConfig) -> Engine {
    let mut ctx = ToolContext::new(workdir);
    ctx.faults = faults;
    Engine::new(scenario(name), ctx, cfg)
}
