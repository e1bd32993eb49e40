mod common;

use std::collections::BTreeMap;

use common::*;
use stormdesk_core::agent::{AgentIdentity, AgentOutput, AgentRole, ScenarioScript, ScriptedBackend};
use stormdesk_core::orchestrator::{
    events_ndjson, write_report, Blackboard, CallKind, Engine, EngineConfig, Mode, OrchestratorError, RunReport,
    SessionEvent, SubtaskStatus, ToolCategory, ToolContext,
};
use stormdesk_core::recovery::{FailureClass, FaultPlan};

fn tool_seq(r: &RunReport) -> Vec<String> {
    match r {
        RunReport::Simple(s) => s.tools.clone(),
        _ => panic!("expected a simple run"),
    }
}

#[test]
fn simple_intensity_pipeline() {
    let wd = typhoon_workdir();
    let e = engine("simple_intensity", wd.path(), FaultPlan::default(), EngineConfig::default());
    let r = e.run(&goal("simple_intensity.txt"), None).unwrap();
    assert_eq!(
        tool_seq(&r),
        ["enter_easy_task_mode", "inspect_dataset", "ingest_tensor", "locate_feature", "plot_cartesian_chart", "generate_response"]
    );
    let svg = std::fs::read_to_string(wd.path().join("plots/typhoon_intensity_evolution.svg")).unwrap();
    assert!(svg.contains(">922.769<"));
}

#[test]
fn unknown_tool_is_rejected() {
    let wd = tempfile::tempdir().unwrap();
    let mut s = ScenarioScript::new("fly", 0);
    s.push("assistant", AgentOutput::RequestTool { tool: "fly".into(), args: BTreeMap::new() });
    let e = Engine::new(std::sync::Arc::new(ScriptedBackend::new(s)), ToolContext::new(wd.path()), EngineConfig::default());
    let err = e.run("plot something", Some(Mode::Simple)).unwrap_err();
    assert!(matches!(err, OrchestratorError::UnknownTool(t) if t == "fly"));
}

#[test]
fn planner_may_not_execute() {
    let wd = tempfile::tempdir().unwrap();
    let e = Engine::new(
        std::sync::Arc::new(ScriptedBackend::new(ScenarioScript::default())),
        ToolContext::new(wd.path()),
        EngineConfig::default(),
    );
    let planner = AgentIdentity::new("MetaPlanner", AgentRole::MetaPlanner);
    let args = [("path".to_string(), serde_json::json!("."))].into();
    let err = e.invoke_tool(&planner, "list_directory", &args, &mut Blackboard::default()).unwrap_err();
    assert!(matches!(err, OrchestratorError::PlannerMayNotExecute(_)));
    assert!(e.ledger().records().is_empty());
}

#[test]
fn bad_namelist_path_is_an_error_record() {
    let wd = tempfile::tempdir().unwrap();
    let e = Engine::new(
        std::sync::Arc::new(ScriptedBackend::new(ScenarioScript::default())),
        ToolContext::new(wd.path()),
        EngineConfig::default(),
    );
    let w = AgentIdentity::worker("wrf_main_simulator", "wrf_main_simulator");
    let args = [("namelist".to_string(), serde_json::json!("sim/nope.input"))].into();
    let err = e.invoke_tool(&w, "run_simulation", &args, &mut Blackboard::default()).unwrap_err();
    assert!(matches!(err, OrchestratorError::ToolError { class: FailureClass::Unknown, .. }));
    let recs = e.ledger().records();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].category, Some(ToolCategory::PhysicalSimulation));
    assert!(matches!(&recs[0].outcome, stormdesk_core::orchestrator::Outcome::Error(c) if c == "Unknown"));
}

#[test]
fn squall_complex_runs_and_revises_each_subtask() {
    let wd = tempfile::tempdir().unwrap();
    let e = engine("squall_complex", wd.path(), FaultPlan::default(), EngineConfig::default());
    let r = e.run(&goal("squall_soil_moisture.txt"), None).unwrap();
    let RunReport::Complex(c) = &r else { panic!("expected complex mode") };
    assert!(c.roadmap.subtasks.iter().all(|s| s.status == SubtaskStatus::Done));
    let events = e.ledger().events();
    let revisions = events.iter().filter(|e| matches!(e, SessionEvent::StateRevision { .. })).count();
    assert_eq!(revisions, 5);
    for p in &c.artifacts {
        assert!(wd.path().join(p).exists(), "{p}");
    }
    let written = write_report(wd.path(), &r, &events).unwrap();
    assert_eq!(written.len(), 4);
    let report = std::fs::read_to_string(wd.path().join("report.md")).unwrap();
    assert!(report.contains("trajectory_analysis"));
    assert_eq!(events_ndjson(&events).lines().count(), events.len());
}

#[test]
fn missing_artifact_fails_mechanically() {
    let wd = tempfile::tempdir().unwrap();
    let mut s = ScenarioScript::new("missing", 0);
    s.push(
        "MetaPlanner",
        AgentOutput::PlanRoadmap {
            subtasks: vec![stormdesk_core::agent::PlannedSubtask {
                id: 1,
                description: "configure".into(),
                worker_spec: "wps_configurer".into(),
                depends_on: vec![],
                artifacts: vec!["sim/never.masd".into()],
            }],
        },
    );
    // A pass verdict that must never be consulted.
    s.push("MetaPlanner", AgentOutput::Verdict { pass: true, note: "fine".into() });
    for _ in 0..4 {
        s.push("wps_configurer", AgentOutput::FinalResponse { text: "done".into() });
    }
    let e = Engine::new(std::sync::Arc::new(ScriptedBackend::new(s)), ToolContext::new(wd.path()), EngineConfig::default());
    let err = e.run("multi-stage check", None).unwrap_err();
    assert!(matches!(err, OrchestratorError::VerificationFailed { id: 1, ref note } if note.starts_with("artifact missing")));
    let planner_calls = e.ledger().records().iter().filter(|r| r.agent == "MetaPlanner").count();
    assert_eq!(planner_calls, 1, "only the planning call reaches the planner");
}

#[test]
fn corrupt_dataset_fails_mechanically() {
    let wd = typhoon_workdir();
    let path = wd.path().join("sim/typhoon_output.masd");
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] ^= 0xff;
    std::fs::write(&path, bytes).unwrap();
    let mut s = ScenarioScript::new("corrupt", 0);
    s.push(
        "MetaPlanner",
        AgentOutput::PlanRoadmap {
            subtasks: vec![stormdesk_core::agent::PlannedSubtask {
                id: 1,
                description: "analyse".into(),
                worker_spec: "data_analyst".into(),
                depends_on: vec![],
                artifacts: vec!["sim/typhoon_output.masd".into()],
            }],
        },
    );
    for _ in 0..4 {
        s.push("data_analyst", AgentOutput::FinalResponse { text: "done".into() });
    }
    let e = Engine::new(std::sync::Arc::new(ScriptedBackend::new(s)), ToolContext::new(wd.path()), EngineConfig::default());
    let err = e.run("experiment", None).unwrap_err();
    assert!(matches!(err, OrchestratorError::VerificationFailed { ref note, .. } if note.starts_with("artifact invalid")));
}

#[test]
fn unknown_fault_exhausts_repair_budget() {
    let wd = tempfile::tempdir().unwrap();
    let e = engine("squall_complex", wd.path(), FaultPlan::new(&[FailureClass::Unknown]), EngineConfig::default());
    let err = e.run(&goal("squall_soil_moisture.txt"), None).unwrap_err();
    assert!(matches!(err, OrchestratorError::SubtaskFailed { id: 4, .. }), "{err}");
    let repairs = e.ledger().events().iter().filter(|e| matches!(e, SessionEvent::Repair { .. })).count();
    assert_eq!(repairs, 3);
}

#[test]
fn typhoon_serial_and_concurrent_schedules_agree() {
    let mut digests = Vec::new();
    for workers in [1, 2] {
        let wd = tempfile::tempdir().unwrap();
        let cfg = EngineConfig { workers, ..EngineConfig::default() };
        let e = engine("typhoon_complex", wd.path(), FaultPlan::default(), cfg);
        let r = e.run(&goal("typhoon_sst.txt"), None).unwrap();
        let RunReport::Complex(c) = r else { panic!() };
        let recs = e.ledger().records();
        assert_eq!(recs.iter().map(|r| r.seq).collect::<Vec<_>>(), (1..=recs.len() as u64).collect::<Vec<_>>());
        assert!(recs.iter().all(|r| r.agent != "MetaPlanner" || r.kind == CallKind::ReasoningPlanning));
        let mut files: Vec<(String, Vec<u8>)> =
            c.artifacts.iter().map(|p| (p.clone(), std::fs::read(wd.path().join(p)).unwrap())).collect();
        files.sort();
        digests.push(files);
    }
    assert_eq!(digests[0], digests[1]);
}
