//! Markdown session report, NDJSON event log and telemetry plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::engine::RunReport;
use super::telemetry::{events_ndjson, records_of, telemetry_summary, SessionEvent, TelemetrySummary};
use super::OrchestratorError;
use crate::viz::{self, ChartSpec, Series};

// Paths relative to the workdir.
pub const REPORT_FILE: &str = "report.md";
pub const EVENTS_FILE: &str = "logs/events.ndjson";
pub const CUMULATIVE_SVG: &str = "plots/telemetry_cumulative.svg";
pub const AGENTS_SVG: &str = "plots/telemetry_agents.svg";

fn summary_section(s: &mut String, t: &TelemetrySummary) {
    let _ = writeln!(s, "## Telemetry\n\nTotal calls: {} (errors: {})\n", t.total, t.errors);
    s.push_str("| agent | calls |\n|---|---|\n");
    for (a, n) in &t.per_agent {
        let _ = writeln!(s, "| {a} | {n} |");
    }
    s.push_str("\n| kind | calls |\n|---|---|\n");
    for (k, n) in &t.per_kind {
        let _ = writeln!(s, "| {k} | {n} |");
    }
    if !t.per_category.is_empty() {
        s.push_str("\n| tool category | calls |\n|---|---|\n");
        for (c, n) in &t.per_category {
            let _ = writeln!(s, "| {c} | {n} |");
        }
    }
    let _ = writeln!(s, "\n![cumulative calls]({CUMULATIVE_SVG})\n\n![calls per agent]({AGENTS_SVG})");
}

pub fn render_report(report: &RunReport, events: &[SessionEvent]) -> String {
    let summary = telemetry_summary(&records_of(events));
    let mut s = String::from("# Session report\n\n");
    match report {
        RunReport::Simple(r) => {
            let _ = writeln!(s, "Mode: simple\n\nRequest: {}\n", r.request.trim());
            s.push_str("## Tool sequence\n\n");
            for (i, t) in r.tools.iter().enumerate() {
                let _ = writeln!(s, "{}. `{t}`", i + 1);
            }
            s.push_str("\n## Artifacts\n\n");
            for a in &r.artifacts {
                let _ = writeln!(s, "- `{a}`");
            }
            let _ = writeln!(s, "\n## Response\n\n{}\n", r.final_text);
        }
        RunReport::Complex(r) => {
            let _ = writeln!(s, "Mode: complex\n\nGoal: {}\n\nRoadmap revision: {}\n", r.roadmap.goal.trim(), r.roadmap.revision);
            s.push_str("## Subtasks\n\n| id | description | worker | status | tool calls | repairs |\n|---|---|---|---|---|---|\n");
            for st in &r.roadmap.subtasks {
                let rep = r.subtasks.iter().find(|x| x.id == st.id);
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {:?} | {} | {} |",
                    st.id,
                    st.description,
                    rep.map_or(st.worker_spec.as_str(), |x| x.worker.as_str()),
                    st.status,
                    rep.map_or(0, |x| x.tool_calls),
                    rep.map_or(0, |x| x.repairs),
                );
            }
            s.push_str("\n## Artifacts\n\n");
            for a in &r.artifacts {
                let _ = writeln!(s, "- `{a}`");
            }
            let repairs: Vec<&SessionEvent> = events.iter().filter(|e| matches!(e, SessionEvent::Repair { .. })).collect();
            if !repairs.is_empty() {
                s.push_str("\n## Repairs\n\n");
                for e in repairs {
                    if let SessionEvent::Repair { seq, class, action, subtask } = e {
                        let _ = writeln!(s, "- call {seq} (subtask {subtask}): {class}, applied `{}`", serde_json::to_string(action).unwrap_or_default());
                    }
                }
            }
            let _ = writeln!(s, "\n## Conclusion\n\n{}\n", r.final_text);
        }
    }
    summary_section(&mut s, &summary);
    s
}

/// Writes the report, event log and both telemetry charts under the workdir `dir`.
pub fn write_report(dir: &Path, report: &RunReport, events: &[SessionEvent]) -> Result<Vec<PathBuf>, OrchestratorError> {
    let io = |p: &Path, e: String| OrchestratorError::Io { path: p.display().to_string(), msg: e };
    let mut written = Vec::new();
    for (name, text) in [(REPORT_FILE, render_report(report, events)), (EVENTS_FILE, events_ndjson(events))] {
        let p = dir.join(name);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io(parent, e.to_string()))?;
        }
        std::fs::write(&p, text).map_err(|e| io(&p, e.to_string()))?;
        written.push(p);
    }
    let t = telemetry_summary(&records_of(events));
    if t.total > 0 {
        let spec = ChartSpec {
            title: "Cumulative calls".into(),
            x_label: "time".into(),
            y_label: "calls".into(),
            series: vec![Series {
                label: "all agents".into(),
                x: t.cumulative.iter().map(|c| c.0).collect(),
                y: t.cumulative.iter().map(|c| c.1 as f64).collect(),
            }],
            markers: vec![],
        };
        let p = dir.join(CUMULATIVE_SVG);
        viz::plot_cartesian_chart(&spec, &p).map_err(|e| io(&p, e.to_string()))?;
        written.push(p);
        let bars: Vec<(String, f64)> = t.per_agent.iter().map(|(a, n)| (a.clone(), *n as f64)).collect();
        let p = dir.join(AGENTS_SVG);
        viz::plot_bar_chart("Calls per agent", &bars, &p).map_err(|e| io(&p, e.to_string()))?;
        written.push(p);
    }
    Ok(written)
}
