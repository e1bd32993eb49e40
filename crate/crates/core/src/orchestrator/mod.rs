//! Verification engine: mode selection, roadmap planning, per-subtask
//! workers, state revision after every subtask, and the call ledger.

pub mod engine;
pub mod registry;
pub mod report;
pub mod roadmap;
pub mod telemetry;
pub mod tools;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::BackendError;
use crate::recovery::FailureClass;

pub use engine::{ComplexReport, Engine, EngineConfig, RunReport, SimpleReport, SubtaskReport};
pub use registry::{ToolCategory, ToolRegistry, ToolSpec};
pub use report::{render_report, write_report, AGENTS_SVG, CUMULATIVE_SVG, EVENTS_FILE, REPORT_FILE};
pub use roadmap::{Roadmap, Subtask, SubtaskStatus, KNOWN_WORKER_SPECS};
pub use telemetry::{
    events_ndjson, records_of, telemetry_summary, CallKind, CallRecord, Clock, Ledger, Outcome, SessionEvent,
    TelemetrySummary,
};
pub use tools::{Blackboard, ToolContext};

/// Name of the planning agent. It reasons and plans but never executes tools.
pub const PLANNER: &str = "MetaPlanner";
/// Name of the single agent that handles a simple-mode task.
pub const SIMPLE_AGENT: &str = "assistant";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Simple,
    Complex,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(Mode::Simple),
            "complex" => Ok(Mode::Complex),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Keywords whose presence marks a request as needing the complex mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeTriggers(pub Vec<String>);

pub const DEFAULT_TRIGGERS: [&str; 12] = [
    "simulation",
    "simulate",
    "control group",
    "control and",
    "experiment",
    "perturb",
    "sensitivity",
    "multi-stage",
    "hypothesis",
    "namelist",
    "run the model",
    "wrf",
];

impl Default for ModeTriggers {
    fn default() -> Self {
        Self(DEFAULT_TRIGGERS.iter().map(|s| s.to_string()).collect())
    }
}

impl ModeTriggers {
    pub fn matches(&self, request: &str) -> bool {
        let r = request.to_lowercase();
        self.0.iter().any(|t| r.contains(&t.to_lowercase()))
    }
}

/// An explicit override wins; otherwise Complex iff a trigger matches.
pub fn select_mode(request: &str, override_mode: Option<Mode>, triggers: &ModeTriggers) -> Mode {
    match override_mode {
        Some(m) => m,
        None if triggers.matches(request) => Mode::Complex,
        None => Mode::Simple,
    }
}

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("invalid arguments for {tool}: {msg}")]
    ArgValidation { tool: String, msg: String },
    #[error("{0} plans but may not execute tools")]
    PlannerMayNotExecute(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("{tool} failed ({class}): {message}")]
    ToolError { tool: String, class: FailureClass, message: String },
    #[error("loop budget of {budget} calls exhausted by {agent}")]
    LoopBudgetExhausted { agent: String, budget: usize },
    #[error("subtask {id} failed: {reason}")]
    SubtaskFailed { id: u32, reason: String },
    #[error("subtask {id} failed verification: {note}")]
    VerificationFailed { id: u32, note: String },
    #[error("protocol violation: {agent} answered {got} where {expected} was expected")]
    ProtocolViolation { agent: String, expected: String, got: String },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
}
