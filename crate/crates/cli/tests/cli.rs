//! The binary's artifact and exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stormdesk_core::agent::{load_script, AgentOutput, ScenarioScript};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn scenario(name: &str) -> String {
    format!("scripted:{}", fixtures().join("scenarios").join(format!("{name}.json")).display())
}

fn goal(name: &str) -> PathBuf {
    fixtures().join("goals").join(name)
}

fn stormdesk(workdir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stormdesk"))
        .arg("--workdir")
        .arg(workdir)
        .args(args)
        .env_remove("TIANJI_WORKDIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn write_script(dir: &Path, script: &ScenarioScript) -> String {
    let path = dir.join("script.json");
    std::fs::write(&path, script.to_json()).unwrap();
    format!("scripted:{}", path.display())
}

#[test]
fn debate_writes_its_four_artifacts() {
    let wd = tempfile::tempdir().unwrap();
    let corpus = fixtures().join("corpus");
    let topic = goal("debate_tc_topic.txt");
    let o = stormdesk(
        wd.path(),
        &["--backend", &scenario("debate_tc"), "debate", topic.to_str().unwrap(), "--corpus", corpus.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for a in ["logs/debate_transcript.ndjson", "analysis/debate_scores.csv", "plots/debate_scores.svg", "final_hypothesis.md"] {
        assert!(wd.path().join(a).is_file(), "{a} missing");
    }
    let csv = std::fs::read_to_string(wd.path().join("analysis/debate_scores.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("Alice,1,33"));
    assert_eq!(stdout_json(&o)["author"], "Alice");
}

#[test]
fn single_round_debate_with_a_literal_topic() {
    let wd = tempfile::tempdir().unwrap();
    let mut s = ScenarioScript::new("one", 1);
    s.push("Solo", AgentOutput::ProposeHypothesis { statement: "warm water deepens storms".into(), citations: vec![] });
    s.push("Host", AgentOutput::Score { scientificity: 7, rationality: 6, novelty: 5, effectiveness: 8 });
    s.push("Chief", AgentOutput::SelectFinal { hypothesis_id: 1, justification: "only candidate".into() });
    let backend = write_script(wd.path(), &s);
    let o = stormdesk(wd.path(), &["--backend", &backend, "debate", "Why do storms deepen?", "--rounds", "1", "--researchers", "Solo:thermodynamics"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let md = std::fs::read_to_string(wd.path().join("final_hypothesis.md")).unwrap();
    assert!(md.contains("warm water deepens storms") && md.contains("only candidate"));
    assert!(wd.path().join("plots/debate_scores.svg").is_file());
}

#[test]
fn configuration_errors_exit_2() {
    let wd = tempfile::tempdir().unwrap();
    assert_eq!(code(&stormdesk(wd.path(), &["--backend", "carrier-pigeon", "debate", "x"])), 2);
    assert_eq!(code(&stormdesk(wd.path(), &["debate", "x"])), 2, "missing backend");
    assert_eq!(code(&stormdesk(wd.path(), &["frobnicate"])), 2);
    assert_eq!(code(&stormdesk(wd.path(), &["--workers", "0", "sim", "namelist", "--case", "squall"])), 2);
    assert_eq!(code(&stormdesk(wd.path(), &["--inject", "gremlins", "sim", "namelist", "--case", "squall"])), 2);
    let bad = stormdesk(wd.path(), &["--backend", &scenario("debate_tc"), "debate", "x", "--researchers", "A,A"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn exhausted_script_is_a_protocol_failure() {
    let wd = tempfile::tempdir().unwrap();
    let mut s = load_script(fixtures().join("scenarios/debate_tc.json")).unwrap();
    s.entries.retain(|e| e.agent != "Chief");
    let backend = write_script(wd.path(), &s);
    let topic = goal("debate_tc_topic.txt");
    assert_eq!(code(&stormdesk(wd.path(), &["--backend", &backend, "debate", topic.to_str().unwrap()])), 3);
}

#[test]
fn squall_verification_reports_five_done_subtasks() {
    let wd = tempfile::tempdir().unwrap();
    let g = goal("squall_soil_moisture.txt");
    let o = stormdesk(wd.path(), &["--backend", &scenario("squall_complex"), "verify", g.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(wd.path().join("report.md")).unwrap();
    assert_eq!(report.matches("| Done |").count(), 5, "{report}");
    for a in ["logs/events.ndjson", "plots/telemetry_cumulative.svg", "plots/telemetry_agents.svg", "analysis/rain_track.csv"] {
        assert!(wd.path().join(a).is_file(), "{a} missing");
    }
}

#[test]
fn unrepairable_fault_exits_4_and_keeps_the_event_log() {
    let wd = tempfile::tempdir().unwrap();
    let g = goal("squall_soil_moisture.txt");
    let o = stormdesk(wd.path(), &["--backend", &scenario("squall_complex"), "--inject", "unknown", "verify", g.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let log = std::fs::read_to_string(wd.path().join("logs/events.ndjson")).unwrap();
    assert!(log.lines().count() > 10);
}

#[test]
fn rejected_verdict_exits_5() {
    let wd = tempfile::tempdir().unwrap();
    let mut s = load_script(fixtures().join("scenarios/squall_complex.json")).unwrap();
    let first_verdict = s
        .entries
        .iter_mut()
        .find(|e| e.agent == "MetaPlanner" && matches!(e.output, AgentOutput::Verdict { .. }))
        .unwrap();
    first_verdict.output = AgentOutput::Verdict { pass: false, note: "namelist lacks the soil scheme".into() };
    let backend = write_script(wd.path(), &s);
    let g = goal("squall_soil_moisture.txt");
    let o = stormdesk(wd.path(), &["--backend", &backend, "--repair-budget", "0", "verify", g.to_str().unwrap()]);
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simple_tasks_produce_their_named_plots() {
    let cases = [
        ("simple_intensity", "typhoon_intensity_evolution"),
        ("simple_track", "typhoon_track_with_slp"),
        ("simple_precip", "typhoon_total_precipitation"),
        ("simple_divergence", "typhoon_divergence_zone"),
    ];
    let wd = tempfile::tempdir().unwrap();
    assert_eq!(code(&stormdesk(wd.path(), &["fixture", "typhoon-output"])), 0);
    for (name, svg) in cases {
        let g = goal(&format!("{name}.txt"));
        let o = stormdesk(wd.path(), &["--backend", &scenario(name), "verify", g.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout_json(&o)["run"]["mode"], "simple");
        assert!(wd.path().join(format!("plots/{svg}.svg")).is_file(), "{svg}");
    }
}

#[test]
fn sim_and_analyze_pass_through() {
    let wd = tempfile::tempdir().unwrap();
    for step in [
        &["sim", "namelist", "--case", "typhoon"][..],
        &["sim", "fetch", "--case", "typhoon"],
        &["sim", "link-vtable"],
        &["sim", "preprocess"],
        &["sim", "init"],
    ] {
        assert_eq!(code(&stormdesk(wd.path(), step)), 0, "{step:?}");
    }
    let run = |out: &str| {
        let o = stormdesk(wd.path(), &["sim", "run", "--out", out]);
        assert_eq!(code(&o), 0);
        std::fs::read(wd.path().join(out)).unwrap()
    };
    assert_eq!(run("sim/out.masd"), run("sim/again.masd"), "repeated runs differ");

    let o = stormdesk(wd.path(), &["analyze", "locate", "--var", "PSFC", "--mode", "min"]);
    assert_eq!(code(&o), 0);
    let pts = stdout_json(&o);
    assert_eq!(pts.as_array().unwrap().len(), 13);
    assert!(pts[0]["value"].is_f64() && pts[0]["lat"].is_f64());

    assert_eq!(code(&stormdesk(wd.path(), &["analyze", "locate", "--var", "NOPE", "--mode", "min"])), 4);
    assert_eq!(code(&stormdesk(wd.path(), &["sim", "perturb", "--input", "/etc/passwd", "--output", "x", "--var", "T", "--op", "add", "--value", "1"])), 4);
    let o = stormdesk(wd.path(), &["--inject", "parallel-overflow", "sim", "run"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ParallelOverflow"));
}

#[test]
fn workdir_defaults_from_the_environment() {
    let wd = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_stormdesk"))
        .args(["sim", "namelist", "--case", "squall"])
        .env("TIANJI_WORKDIR", wd.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(wd.path().join("sim/namelist.input").is_file());
}
