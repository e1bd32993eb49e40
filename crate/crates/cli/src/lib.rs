//! Command-line front end over one working directory: debate runs,
//! verification runs, and direct simulator and analysis calls that go
//! through the same tool implementations the agents use.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 agent protocol
//! violation, 4 failed subtask or tool, 5 failed verification.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use stormdesk_core::agent::{open_backend, AgentIdentity, AgentOutput, AgentSession, BackendError, EventPayload};
use stormdesk_core::debate::{
    export_score_curve, run_debate, score_curve_csv, transcript_ndjson, DebateConfig, DebateError, DebateOutcome,
    RetrievalConfig,
};
use stormdesk_core::minisim::cases::synthetic_typhoon_dataset;
use stormdesk_core::minisim::write_dataset;
use stormdesk_core::orchestrator::tools::{execute, Args as ToolArgs};
use stormdesk_core::orchestrator::{
    events_ndjson, write_report, Blackboard, Engine, EngineConfig, Mode, OrchestratorError, RunReport, ToolContext,
    ToolRegistry, EVENTS_FILE, REPORT_FILE,
};
use stormdesk_core::recovery::{classify_failure, FailureClass, FaultPlan};
use stormdesk_core::viz::{plot_cartesian_chart, ChartSpec, Series, VizError};

pub const DEBATE_TRANSCRIPT: &str = "logs/debate_transcript.ndjson";
pub const DEBATE_SCORES_CSV: &str = "analysis/debate_scores.csv";
pub const DEBATE_SCORES_SVG: &str = "plots/debate_scores.svg";
pub const FINAL_HYPOTHESIS: &str = "final_hypothesis.md";
pub const TYPHOON_OUTPUT: &str = "sim/typhoon_output.masd";

const DEFAULT_RESEARCHERS: &str = "Alice:dynamics,Bob:synoptic steering,Carol:air-sea interaction";

#[derive(Debug, Parser)]
#[command(name = "stormdesk", version, about = "Hypothesis debate and verification around a toy atmospheric model")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Working directory; every artifact lands under it.
    #[arg(long, global = true, env = "TIANJI_WORKDIR", default_value = ".")]
    pub workdir: PathBuf,
    /// Agent backend, `scripted:<scenario.json>`.
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Force `simple` or `complex` mode instead of keyword selection. Not
    /// global, since analysis subcommands take their own `--mode`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long, global = true, default_value_t = 3)]
    pub repair_budget: u32,
    /// Cap on concurrently running workers.
    #[arg(long, global = true, default_value_t = 2)]
    pub workers: usize,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Failure class to inject once at its consuming tool; repeatable.
    #[arg(long = "inject", global = true)]
    pub inject: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a multi-round hypothesis debate.
    Debate {
        /// Topic text, or a path to a file holding it.
        topic: String,
        #[arg(long, default_value_t = 6)]
        rounds: u32,
        /// Comma-separated `name:expertise` list in base speaking order.
        #[arg(long, default_value = DEFAULT_RESEARCHERS)]
        researchers: String,
        /// Directory of documents for literature retrieval.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        no_rebuttal: bool,
    },
    /// Verify a hypothesis or answer an analysis request end to end.
    Verify {
        /// File holding the goal or request text.
        goal: PathBuf,
        /// Same as the top-level `--mode`.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Simulator stages.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Tensor analysis on datasets in the workdir.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Deterministic fixture data.
    #[command(subcommand)]
    Fixture(FixtureCmd),
}

#[derive(Debug, Subcommand)]
pub enum SimCmd {
    /// Write the stock namelist for a case.
    Namelist {
        #[arg(long)]
        case: String,
        #[arg(long)]
        path: Option<String>,
    },
    /// Set one namelist key.
    Edit {
        #[arg(long)]
        key: String,
        #[arg(long)]
        value: String,
        #[arg(long)]
        path: Option<String>,
    },
    /// Generate the case's input files and variable-table library.
    Fetch {
        #[arg(long)]
        case: String,
        #[arg(long)]
        dir: Option<String>,
    },
    /// Put the standard variable table in place.
    LinkVtable {
        #[arg(long)]
        dir: Option<String>,
    },
    Preprocess {
        #[arg(long)]
        namelist: Option<String>,
        #[arg(long)]
        input_dir: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    Init {
        #[arg(long)]
        namelist: Option<String>,
        #[arg(long)]
        ic: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    Run {
        #[arg(long)]
        namelist: Option<String>,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    Perturb {
        #[arg(long)]
        input: String,
        #[arg(long)]
        output: String,
        #[arg(long)]
        var: String,
        /// `add` or `scale`.
        #[arg(long)]
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        value: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCmd {
    Inspect {
        path: String,
    },
    /// Extremum location per time.
    Locate {
        #[arg(long, default_value = "sim/out.masd")]
        path: String,
        #[arg(long)]
        var: String,
        #[arg(long)]
        mode: String,
        /// `all`, `last` or a time index.
        #[arg(long, default_value = "all")]
        time: String,
    },
    /// Area mean, min or max of one time slice.
    Stat {
        #[arg(long, default_value = "sim/out.masd")]
        path: String,
        #[arg(long)]
        var: String,
        #[arg(long)]
        stat: String,
        #[arg(long, default_value = "last")]
        time: String,
    },
    /// Follow an extremum through time.
    Track {
        #[arg(long, default_value = "sim/out.masd")]
        path: String,
        #[arg(long)]
        var: String,
        #[arg(long)]
        mode: String,
        #[arg(long)]
        radius_km: Option<f64>,
        #[arg(long)]
        csv: Option<String>,
    },
    /// Per-time deviation between the tracks of two runs.
    Compare {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        var: String,
        #[arg(long)]
        mode: String,
        #[arg(long)]
        radius_km: Option<f64>,
        #[arg(long)]
        csv: Option<String>,
    },
    /// Azimuthal mean around the field's extremum.
    Profile {
        #[arg(long, default_value = "sim/out.masd")]
        path: String,
        #[arg(long)]
        var: String,
        #[arg(long, default_value = "last")]
        time: String,
        #[arg(long, default_value = "min")]
        center_mode: String,
        #[arg(long)]
        r_max_km: f64,
        #[arg(long, default_value_t = 10)]
        bins: u64,
        #[arg(long)]
        csv: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FixtureCmd {
    /// Write the synthetic typhoon output the simple-mode tasks read.
    TyphoonOutput {
        #[arg(long, default_value = TYPHOON_OUTPUT)]
        out: String,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Debate(#[from] DebateError),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
    #[error(transparent)]
    Viz(#[from] VizError),
    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
}

fn backend_code(e: &BackendError) -> i32 {
    match e {
        BackendError::ScriptExhausted { .. } | BackendError::MalformedOutput { .. } => 3,
        BackendError::Parse { .. }
        | BackendError::DuplicateKey { .. }
        | BackendError::Io { .. }
        | BackendError::Unsupported(_)
        | BackendError::BadUri(_) => 2,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use OrchestratorError as O;
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Viz(_) => 2,
            CliError::Backend(e) | CliError::Debate(DebateError::Backend(e)) | CliError::Orchestrator(O::Backend(e)) => {
                backend_code(e)
            }
            CliError::Debate(DebateError::InvalidConfig(_) | DebateError::ProviderUnavailable(_)) => 2,
            CliError::Debate(
                DebateError::ProtocolViolation { .. } | DebateError::UnknownAgent(_) | DebateError::UnknownHypothesis(_),
            ) => 3,
            CliError::Orchestrator(e) => match e {
                O::Io { .. } => 2,
                O::PlannerMayNotExecute(_) | O::ProtocolViolation { .. } | O::InvalidPlan(_) => 3,
                O::UnknownTool(_)
                | O::ArgValidation { .. }
                | O::ToolError { .. }
                | O::LoopBudgetExhausted { .. }
                | O::SubtaskFailed { .. } => 4,
                O::VerificationFailed { .. } => 5,
                O::Backend(_) => unreachable!("matched above"),
            },
        }
    }
}

/// Validated run settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub workdir: PathBuf,
    pub backend: Option<String>,
    pub mode: Option<Mode>,
    pub repair_budget: u32,
    pub workers: usize,
    pub seed: u64,
    pub inject: Vec<FailureClass>,
}

impl RunConfig {
    pub fn from_args(a: &RunArgs) -> Result<Self, CliError> {
        if a.workers == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        std::fs::create_dir_all(&a.workdir).map_err(|e| io_err(&a.workdir, e))?;
        let mode = a.mode.as_deref().map(str::parse::<Mode>).transpose().map_err(CliError::Config)?;
        let inject = a
            .inject
            .iter()
            .map(|c| c.parse::<FailureClass>().map_err(|e| CliError::Config(e.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            workdir: a.workdir.clone(),
            backend: a.backend.clone(),
            mode,
            repair_budget: a.repair_budget,
            workers: a.workers,
            seed: a.seed,
            inject,
        })
    }

    fn context(&self) -> ToolContext {
        let mut ctx = ToolContext::new(&self.workdir);
        ctx.seed = self.seed;
        ctx.faults = FaultPlan::new(&self.inject);
        ctx
    }

    fn backend(&self) -> Result<std::sync::Arc<dyn stormdesk_core::agent::Backend>, CliError> {
        let uri = self.backend.as_deref().ok_or_else(|| CliError::Config("--backend is required".into()))?;
        Ok(open_backend(uri)?)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), msg: e.to_string() }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Parses argv and runs the command, returning the process exit code.
/// Output goes to `out`; diagnostics to stderr.
pub fn main_with_args<I, T>(args: I, out: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let mut run_args = cli.run;
    if let Command::Verify { mode: Some(m), .. } = &cli.command {
        run_args.mode = Some(m.clone());
    }
    let cfg = RunConfig::from_args(&run_args)?;
    let text = match cli.command {
        Command::Debate { topic, rounds, researchers, corpus, k, no_rebuttal } => {
            let topic = match std::fs::read_to_string(&topic) {
                Ok(t) => t,
                Err(_) if !Path::new(&topic).exists() => topic,
                Err(e) => return Err(io_err(Path::new(&topic), e)),
            };
            let mut dc = DebateConfig::new(topic.trim(), parse_researchers(&researchers)?, rounds);
            dc.rebuttal_enabled = !no_rebuttal;
            dc.retrieval = corpus.map(|d| RetrievalConfig { provider: format!("corpus:{}", d.display()), k });
            cmd_debate(&cfg, &dc)?
        }
        Command::Verify { goal, .. } => cmd_verify(&cfg, &goal)?,
        Command::Sim(c) => cmd_sim(&cfg, c)?,
        Command::Analyze(c) => cmd_analyze(&cfg, c)?,
        Command::Fixture(FixtureCmd::TyphoonOutput { out: rel }) => {
            let path = cfg.context().output(&rel).map_err(CliError::Config)?;
            write_dataset(&path, &synthetic_typhoon_dataset())
                .map_err(|e| CliError::Io { path: path.display().to_string(), msg: e.to_string() })?;
            json!({ "artifact": rel }).to_string()
        }
    };
    writeln!(out, "{text}").map_err(|e| CliError::Io { path: "<stdout>".into(), msg: e.to_string() })
}

fn parse_researchers(list: &str) -> Result<Vec<AgentIdentity>, CliError> {
    list.split(',')
        .map(|item| {
            let (name, expertise) = item.split_once(':').unwrap_or((item, ""));
            let name = name.trim();
            if name.is_empty() {
                return Err(CliError::Config(format!("bad researcher entry `{item}`")));
            }
            Ok(AgentIdentity::researcher(name, expertise.trim()))
        })
        .collect()
}

/// Runs the debate and writes its four artifacts.
pub fn cmd_debate(cfg: &RunConfig, dc: &DebateConfig) -> Result<String, CliError> {
    dc.validate()?;
    let session = AgentSession::new(cfg.backend()?);
    let outcome = run_debate(dc, &session)?;
    let wd = &cfg.workdir;
    write_file(&wd.join(DEBATE_TRANSCRIPT), &transcript_ndjson(&outcome.transcript))?;
    write_file(&wd.join(DEBATE_SCORES_CSV), &score_curve_csv(&export_score_curve(&outcome)))?;
    plot_cartesian_chart(&score_chart(&outcome), &wd.join(DEBATE_SCORES_SVG))?;
    write_file(&wd.join(FINAL_HYPOTHESIS), &final_hypothesis_md(&outcome))?;
    Ok(json!({
        "final_hypothesis": outcome.final_hypothesis.id,
        "author": outcome.final_hypothesis.author,
        "selection_consistent": outcome.selection_consistent,
        "artifacts": [DEBATE_TRANSCRIPT, DEBATE_SCORES_CSV, DEBATE_SCORES_SVG, FINAL_HYPOTHESIS],
    })
    .to_string())
}

/// Total score per round, one line per researcher.
pub fn score_chart(outcome: &DebateOutcome) -> ChartSpec {
    ChartSpec {
        title: "Hypothesis score by round".into(),
        x_label: "round".into(),
        y_label: "total score".into(),
        series: outcome
            .score_series()
            .into_iter()
            .map(|(label, pts)| Series {
                label,
                x: pts.iter().map(|(r, _)| f64::from(*r)).collect(),
                y: pts.iter().map(|(_, t)| f64::from(*t)).collect(),
            })
            .collect(),
        markers: Vec::new(),
    }
}

fn final_hypothesis_md(o: &DebateOutcome) -> String {
    let h = &o.final_hypothesis;
    let mut s = format!("# Final hypothesis\n\n{}\n\n- id: {}\n- author: {}\n- round: {}\n", h.statement, h.id, h.author, h.round);
    let _ = writeln!(s, "- consistent with last-round scores: {}", o.selection_consistent);
    let justification = o.transcript.iter().rev().find_map(|e| match &e.output {
        EventPayload::Agent(AgentOutput::SelectFinal { justification, .. }) => Some(justification.as_str()),
        _ => None,
    });
    if let Some(j) = justification.filter(|j| !j.is_empty()) {
        let _ = writeln!(s, "\n## Justification\n\n{j}");
    }
    if !h.citations.is_empty() {
        s.push_str("\n## Citations\n\n");
        for c in &h.citations {
            let _ = writeln!(s, "- {} ({})", c.title, c.abstract_hash);
        }
    }
    s
}

/// Runs mode selection and the chosen flow, then writes the report. The
/// event log is written on failure too.
pub fn cmd_verify(cfg: &RunConfig, goal: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(goal).map_err(|e| io_err(goal, e))?;
    let ecfg = EngineConfig { workers: cfg.workers, repair_budget: cfg.repair_budget, ..EngineConfig::default() };
    let engine = Engine::new(cfg.backend()?, cfg.context(), ecfg);
    let result = engine.run(&text, cfg.mode);
    let events = engine.ledger().events();
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            write_file(&cfg.workdir.join(EVENTS_FILE), &events_ndjson(&events))?;
            return Err(e.into());
        }
    };
    write_report(&cfg.workdir, &report, &events)?;
    let summary = match &report {
        RunReport::Simple(r) => json!({"mode": "simple", "tools": r.tools, "artifacts": r.artifacts}),
        RunReport::Complex(r) => json!({
            "mode": "complex",
            "subtasks": r.subtasks.iter().map(|s| json!({"id": s.id, "status": s.status, "repairs": s.repairs})).collect::<Vec<_>>(),
            "total_calls": r.summary.total,
        }),
    };
    Ok(json!({"report": REPORT_FILE, "run": summary}).to_string())
}

/// Argument map with `None` entries dropped.
fn tool_args(pairs: &[(&str, Option<Value>)]) -> ToolArgs {
    pairs.iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect()
}

fn s(v: &str) -> Option<Value> {
    Some(Value::from(v))
}

fn os(v: &Option<String>) -> Option<Value> {
    v.as_deref().map(Value::from)
}

fn time_value(t: &str) -> Value {
    t.parse::<u64>().map(Value::from).unwrap_or_else(|_| Value::from(t))
}

/// Executes tool calls in order on one blackboard, as a worker would, and
/// returns every result.
fn pipeline(cfg: &RunConfig, steps: Vec<(&str, ToolArgs)>) -> Result<Vec<Value>, CliError> {
    let registry = ToolRegistry::standard();
    let ctx = cfg.context();
    let mut bb = Blackboard::default();
    let mut results = Vec::with_capacity(steps.len());
    for (tool, args) in steps {
        registry.validate(tool, &args).map_err(|msg| {
            if registry.get(tool).is_none() {
                OrchestratorError::UnknownTool(tool.to_string())
            } else {
                OrchestratorError::ArgValidation { tool: tool.to_string(), msg }
            }
        })?;
        results.push(execute(&ctx, &mut bb, tool, &args).map_err(|message| OrchestratorError::ToolError {
            tool: tool.to_string(),
            class: classify_failure(tool, &message),
            message,
        })?);
    }
    Ok(results)
}

pub fn cmd_sim(cfg: &RunConfig, c: SimCmd) -> Result<String, CliError> {
    let step = match c {
        SimCmd::Namelist { case, path } => ("write_namelist", tool_args(&[("case", s(&case)), ("path", os(&path))])),
        SimCmd::Edit { key, value, path } => {
            ("edit_namelist", tool_args(&[("key", s(&key)), ("value", s(&value)), ("path", os(&path))]))
        }
        SimCmd::Fetch { case, dir } => (
            "fetch_inputs",
            tool_args(&[("case", s(&case)), ("seed", Some(cfg.seed.into())), ("dir", os(&dir))]),
        ),
        SimCmd::LinkVtable { dir } => ("link_vtable", tool_args(&[("dir", os(&dir))])),
        SimCmd::Preprocess { namelist, input_dir, out } => (
            "preprocess",
            tool_args(&[("namelist", os(&namelist)), ("input_dir", os(&input_dir)), ("out", os(&out))]),
        ),
        SimCmd::Init { namelist, ic, out } => {
            ("real_init", tool_args(&[("namelist", os(&namelist)), ("ic", os(&ic)), ("out", os(&out))]))
        }
        SimCmd::Run { namelist, state, out } => {
            ("run_simulation", tool_args(&[("namelist", os(&namelist)), ("state", os(&state)), ("out", os(&out))]))
        }
        SimCmd::Perturb { input, output, var, op, value } => (
            "perturb_field",
            tool_args(&[
                ("input", s(&input)),
                ("output", s(&output)),
                ("var", s(&var)),
                ("op", s(&op)),
                ("value", Some(value.into())),
            ]),
        ),
    };
    Ok(pipeline(cfg, vec![step])?.remove(0).to_string())
}

fn ingest(path: &str, var: &str, time: &str, name: &str) -> (&'static str, ToolArgs) {
    ("ingest_tensor", tool_args(&[("path", s(path)), ("var", s(var)), ("time", Some(time_value(time))), ("as", s(name))]))
}

fn export(name: &str, csv: &Option<String>) -> Option<(&'static str, ToolArgs)> {
    csv.as_ref().map(|p| ("export_csv", tool_args(&[("name", s(name)), ("path", s(p))])))
}

pub fn cmd_analyze(cfg: &RunConfig, c: AnalyzeCmd) -> Result<String, CliError> {
    let mut steps = Vec::new();
    let mut with_csv = false;
    match c {
        AnalyzeCmd::Inspect { path } => steps.push(("inspect_dataset", tool_args(&[("path", s(&path))]))),
        AnalyzeCmd::Locate { path, var, mode, time } => {
            steps.push(ingest(&path, &var, &time, "field"));
            steps.push(("locate_feature", tool_args(&[("tensor", s("field")), ("mode", s(&mode)), ("as", s("points"))])));
        }
        AnalyzeCmd::Stat { path, var, stat, time } => {
            steps.push(ingest(&path, &var, &time, "field"));
            steps.push(("area_stat", tool_args(&[("tensor", s("field")), ("stat", s(&stat))])));
        }
        AnalyzeCmd::Track { path, var, mode, radius_km, csv } => {
            steps.push(ingest(&path, &var, "all", "field"));
            steps.push((
                "track_feature",
                tool_args(&[
                    ("tensor", s("field")),
                    ("mode", s(&mode)),
                    ("radius_km", radius_km.map(Value::from)),
                    ("as", s("track")),
                ]),
            ));
            with_csv = csv.is_some();
            steps.extend(export("track", &csv));
        }
        AnalyzeCmd::Compare { a, b, var, mode, radius_km, csv } => {
            for (path, name) in [(&a, "a"), (&b, "b")] {
                let field = format!("field_{name}");
                steps.push(ingest(path, &var, "all", &field));
                steps.push((
                    "track_feature",
                    tool_args(&[
                        ("tensor", s(&field)),
                        ("mode", s(&mode)),
                        ("radius_km", radius_km.map(Value::from)),
                        ("as", s(name)),
                    ]),
                ));
            }
            steps.push(("track_compare", tool_args(&[("a", s("a")), ("b", s("b")), ("as", s("cmp"))])));
            with_csv = csv.is_some();
            steps.extend(export("cmp", &csv));
        }
        AnalyzeCmd::Profile { path, var, time, center_mode, r_max_km, bins, csv } => {
            steps.push(ingest(&path, &var, &time, "field"));
            steps.push(("locate_feature", tool_args(&[("tensor", s("field")), ("mode", s(&center_mode)), ("as", s("c"))])));
            steps.push((
                "radial_profile",
                tool_args(&[
                    ("tensor", s("field")),
                    ("center", s("c")),
                    ("r_max_km", Some(r_max_km.into())),
                    ("n_bins", Some(bins.into())),
                    ("as", s("profile")),
                ]),
            ));
            with_csv = csv.is_some();
            steps.extend(export("profile", &csv));
        }
    }
    let mut results = pipeline(cfg, steps)?;
    let last = results.pop().unwrap_or(Value::Null);
    if !with_csv {
        return Ok(last.to_string());
    }
    let result = results.pop().unwrap_or(Value::Null);
    Ok(json!({"result": result, "csv": last}).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_cover_each_failure_family() {
        let cases: Vec<(CliError, i32)> = vec![
            (CliError::Config("x".into()), 2),
            (BackendError::BadUri("x".into()).into(), 2),
            (BackendError::ScriptExhausted { agent: "a".into(), step: 0 }.into(), 3),
            (DebateError::InvalidConfig("x".into()).into(), 2),
            (DebateError::UnknownHypothesis(9).into(), 3),
            (DebateError::Backend(BackendError::MalformedOutput { agent: "a".into(), step: 1, reason: "r".into() }).into(), 3),
            (OrchestratorError::PlannerMayNotExecute("p".into()).into(), 3),
            (OrchestratorError::UnknownTool("t".into()).into(), 4),
            (OrchestratorError::SubtaskFailed { id: 1, reason: "r".into() }.into(), 4),
            (OrchestratorError::VerificationFailed { id: 1, note: "n".into() }.into(), 5),
            (OrchestratorError::Backend(BackendError::Io { path: "p".into(), msg: "m".into() }).into(), 2),
        ];
        for (e, want) in cases {
            assert_eq!(e.exit_code(), want, "{e}");
        }
    }

    #[test]
    fn researcher_lists() {
        let r = parse_researchers(DEFAULT_RESEARCHERS).unwrap();
        assert_eq!(r.iter().map(|a| a.name.as_str()).collect::<Vec<_>>(), ["Alice", "Bob", "Carol"]);
        assert_eq!(r[2].expertise.as_deref(), Some("air-sea interaction"));
        assert!(parse_researchers("A,,B").is_err());
    }
}
