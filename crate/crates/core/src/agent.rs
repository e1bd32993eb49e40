//! Agent identities, the structured decision envelope, and the backend
//! interface every role draws its decisions from.
//!
//! The scripted backend replays a JSON scenario keyed by
//! `(agent name, per-agent step)`. Step counters live in [`AgentSession`],
//! so one loaded backend can serve several sessions at once.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentRole {
    Researcher,
    Host,
    ChiefScientist,
    MetaPlanner,
    Worker,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentIdentity {
    pub name: String,
    pub role: AgentRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expertise: Option<String>,
    /// Set for workers: the spec string the worker was created from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worker_spec: Option<String>,
}

impl AgentIdentity {
    pub fn new(name: &str, role: AgentRole) -> Self {
        Self {
            name: name.to_string(),
            role,
            expertise: None,
            worker_spec: None,
        }
    }

    pub fn researcher(name: &str, expertise: &str) -> Self {
        Self {
            expertise: Some(expertise.to_string()),
            ..Self::new(name, AgentRole::Researcher)
        }
    }

    pub fn worker(name: &str, spec: &str) -> Self {
        Self {
            worker_spec: Some(spec.to_string()),
            ..Self::new(name, AgentRole::Worker)
        }
    }
}

/// One subtask as proposed by the planner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedSubtask {
    pub id: u32,
    pub description: String,
    pub worker_spec: String,
    #[serde(default)]
    pub depends_on: Vec<u32>,
    /// Workdir-relative paths the subtask is expected to produce.
    #[serde(default)]
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum AgentOutput {
    ProposeHypothesis {
        statement: String,
        #[serde(default)]
        citations: Vec<String>,
    },
    Rebut {
        target: String,
        critique: String,
    },
    Revise {
        statement: String,
    },
    Score {
        scientificity: i64,
        rationality: i64,
        novelty: i64,
        effectiveness: i64,
    },
    SelectFinal {
        hypothesis_id: u64,
        #[serde(default)]
        justification: String,
    },
    PlanRoadmap {
        subtasks: Vec<PlannedSubtask>,
    },
    RequestTool {
        tool: String,
        #[serde(default)]
        args: BTreeMap<String, serde_json::Value>,
    },
    Verdict {
        pass: bool,
        #[serde(default)]
        note: String,
    },
    FinalResponse {
        text: String,
    },
}

impl AgentOutput {
    pub fn variant(&self) -> &'static str {
        match self {
            AgentOutput::ProposeHypothesis { .. } => "ProposeHypothesis",
            AgentOutput::Rebut { .. } => "Rebut",
            AgentOutput::Revise { .. } => "Revise",
            AgentOutput::Score { .. } => "Score",
            AgentOutput::SelectFinal { .. } => "SelectFinal",
            AgentOutput::PlanRoadmap { .. } => "PlanRoadmap",
            AgentOutput::RequestTool { .. } => "RequestTool",
            AgentOutput::Verdict { .. } => "Verdict",
            AgentOutput::FinalResponse { .. } => "FinalResponse",
        }
    }

    /// Structural checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            AgentOutput::Score {
                scientificity,
                rationality,
                novelty,
                effectiveness,
            } => {
                for (dim, v) in [
                    ("scientificity", scientificity),
                    ("rationality", rationality),
                    ("novelty", novelty),
                    ("effectiveness", effectiveness),
                ] {
                    if !(0..=10).contains(v) {
                        return Err(format!("{dim} score {v} outside 0..=10"));
                    }
                }
                Ok(())
            }
            AgentOutput::RequestTool { tool, .. } if tool.trim().is_empty() => Err("empty tool name".into()),
            _ => Ok(()),
        }
    }
}

/// A retrieved literature entry as shown to agents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub title: String,
    pub abstract_text: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EventPayload {
    Agent(AgentOutput),
    Retrieval { documents: Vec<Document> },
    ToolResult { tool: String, ok: bool, result: serde_json::Value },
}

/// One entry of a shared transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEvent {
    pub seq: u64,
    pub round: u32,
    pub phase: String,
    pub agent: String,
    pub output: EventPayload,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("script exhausted for agent {agent} at step {step}")]
    ScriptExhausted { agent: String, step: usize },
    #[error("malformed output for agent {agent} at step {step}: {reason}")]
    MalformedOutput { agent: String, step: usize, reason: String },
    #[error("scenario parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate scenario entry for agent {agent} step {step}")]
    DuplicateKey { agent: String, step: usize },
    #[error("backend io error on {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("unsupported backend `{0}`")]
    Unsupported(String),
    #[error("invalid backend uri `{0}` (expected scripted:<path> or http:<endpoint>)")]
    BadUri(String),
}

/// Source of agent decisions.
pub trait Backend: Send + Sync {
    /// Decision of `agent` at its `step`-th call, given the full shared
    /// transcript so far.
    fn next_action(&self, agent: &AgentIdentity, step: usize, context: &[TranscriptEvent]) -> Result<AgentOutput, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub agent: String,
    pub step: usize,
    pub output: AgentOutput,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenarioScript {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub entries: Vec<ScriptEntry>,
}

impl ScenarioScript {
    pub fn new(name: &str, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            seed,
            entries: Vec::new(),
        }
    }

    /// Appends `output` as the next step of `agent`.
    pub fn push(&mut self, agent: &str, output: AgentOutput) -> &mut Self {
        let step = self.entries.iter().filter(|e| e.agent == agent).count();
        self.entries.push(ScriptEntry {
            agent: agent.to_string(),
            step,
            output,
        });
        self
    }

    pub fn parse(text: &str) -> Result<Self, BackendError> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let script: ScenarioScript = serde_json::from_str(text).map_err(|e| BackendError::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        let mut seen = std::collections::HashSet::new();
        for e in &script.entries {
            if !seen.insert((e.agent.as_str(), e.step)) {
                return Err(BackendError::DuplicateKey {
                    agent: e.agent.clone(),
                    step: e.step,
                });
            }
        }
        Ok(script)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Number of entries per agent.
    pub fn counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for e in &self.entries {
            *m.entry(e.agent.clone()).or_insert(0) += 1;
        }
        m
    }
}

pub fn load_script(path: impl AsRef<Path>) -> Result<ScenarioScript, BackendError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| BackendError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    ScenarioScript::parse(&text)
}

/// Replays a [`ScenarioScript`]; immutable after construction.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    name: String,
    entries: HashMap<(String, usize), AgentOutput>,
}

impl ScriptedBackend {
    pub fn new(script: ScenarioScript) -> Self {
        let entries = script
            .entries
            .into_iter()
            .map(|e| ((e.agent, e.step), e.output))
            .collect();
        Self {
            name: script.name,
            entries,
        }
    }

    pub fn scenario_name(&self) -> &str {
        &self.name
    }
}

impl Backend for ScriptedBackend {
    fn next_action(&self, agent: &AgentIdentity, step: usize, _context: &[TranscriptEvent]) -> Result<AgentOutput, BackendError> {
        let out = self
            .entries
            .get(&(agent.name.clone(), step))
            .cloned()
            .ok_or_else(|| BackendError::ScriptExhausted {
                agent: agent.name.clone(),
                step,
            })?;
        out.validate().map_err(|reason| BackendError::MalformedOutput {
            agent: agent.name.clone(),
            step,
            reason,
        })?;
        Ok(out)
    }
}

/// Parsed backend selector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendUri {
    Scripted(PathBuf),
    Http(String),
}

impl std::str::FromStr for BackendUri {
    type Err = BackendError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("scripted", p)) if !p.is_empty() => Ok(BackendUri::Scripted(PathBuf::from(p))),
            Some(("http", e)) if !e.is_empty() => Ok(BackendUri::Http(e.to_string())),
            _ => Err(BackendError::BadUri(s.to_string())),
        }
    }
}

/// Builds a backend from a URI string. Only scripted backends are available.
pub fn open_backend(uri: &str) -> Result<Arc<dyn Backend>, BackendError> {
    match uri.parse::<BackendUri>()? {
        BackendUri::Scripted(path) => Ok(Arc::new(ScriptedBackend::new(load_script(path)?))),
        BackendUri::Http(_) => Err(BackendError::Unsupported(uri.to_string())),
    }
}

/// Per-session step counters in front of a shared backend.
pub struct AgentSession {
    backend: Arc<dyn Backend>,
    steps: Mutex<HashMap<String, usize>>,
    /// (agent, step, context length) of every successful call.
    calls: Mutex<Vec<(String, usize, usize)>>,
}

impl AgentSession {
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        Self {
            backend,
            steps: Mutex::new(HashMap::new()),
            calls: Mutex::new(Vec::new()),
        }
    }

    /// Asks the backend for `agent`'s next decision. The step counter
    /// advances by one on success only.
    pub fn next_action(&self, agent: &AgentIdentity, context: &[TranscriptEvent]) -> Result<AgentOutput, BackendError> {
        let step = self.steps.lock().expect("steps lock").get(&agent.name).copied().unwrap_or(0);
        let out = self.backend.next_action(agent, step, context)?;
        self.steps.lock().expect("steps lock").insert(agent.name.clone(), step + 1);
        self.calls
            .lock()
            .expect("calls lock")
            .push((agent.name.clone(), step, context.len()));
        Ok(out)
    }

    pub fn steps_taken(&self, agent: &str) -> usize {
        self.steps.lock().expect("steps lock").get(agent).copied().unwrap_or(0)
    }

    pub fn call_log(&self) -> Vec<(String, usize, usize)> {
        self.calls.lock().expect("calls lock").clone()
    }
}
