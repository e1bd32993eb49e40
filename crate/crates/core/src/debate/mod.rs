//! Multi-round hypothesis debate: researchers propose, rebut and revise,
//! a host scores every hypothesis each round on four dimensions, and a
//! chief scientist selects the final hypothesis.
//!
//! Every event lands in one shared transcript that is handed in full to
//! each subsequent decision.

mod engine;
mod retrieval;
mod schedule;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentIdentity, BackendError};

pub use engine::{export_score_curve, run_debate, score_curve_csv, select_final, transcript_ndjson, ScoreRow};
pub use retrieval::{CorpusProvider, tokenize};
pub use schedule::speaking_order;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub title: String,
    pub abstract_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub id: u64,
    pub author: String,
    pub round: u32,
    pub statement: String,
    pub citations: Vec<Citation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub scientificity: u8,
    pub rationality: u8,
    pub novelty: u8,
    pub effectiveness: u8,
    pub total: u8,
}

impl ScoreCard {
    /// Builds a card, rejecting any dimension outside 0..=10.
    pub fn new(dims: [i64; 4]) -> Option<Self> {
        if dims.iter().any(|d| !(0..=10).contains(d)) {
            return None;
        }
        let d = dims.map(|x| x as u8);
        Some(Self {
            scientificity: d[0],
            rationality: d[1],
            novelty: d[2],
            effectiveness: d[3],
            total: d.iter().sum(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rebuttal {
    pub from: String,
    pub target: String,
    pub round: u32,
    pub critique: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalConfig {
    /// Provider URI, `corpus:<directory>`.
    pub provider: String,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateConfig {
    pub topic: String,
    pub researchers: Vec<AgentIdentity>,
    pub host: AgentIdentity,
    pub chief: AgentIdentity,
    pub rounds: u32,
    pub base_order: Vec<String>,
    pub rebuttal_enabled: bool,
    #[serde(default)]
    pub retrieval: Option<RetrievalConfig>,
}

impl DebateConfig {
    /// Config with the standard host/chief names and base order equal to
    /// the researcher order.
    pub fn new(topic: &str, researchers: Vec<AgentIdentity>, rounds: u32) -> Self {
        use crate::agent::AgentRole;
        let base_order = researchers.iter().map(|r| r.name.clone()).collect();
        Self {
            topic: topic.to_string(),
            researchers,
            host: AgentIdentity::new("Host", AgentRole::Host),
            chief: AgentIdentity::new("Chief", AgentRole::ChiefScientist),
            rounds,
            base_order,
            rebuttal_enabled: true,
            retrieval: None,
        }
    }

    pub fn validate(&self) -> Result<(), DebateError> {
        let bad = |m: String| Err(DebateError::InvalidConfig(m));
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.researchers.is_empty() {
            return bad("at least one researcher is required".into());
        }
        let mut names: Vec<&str> = self.researchers.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("researcher names must be unique".into());
        }
        if [self.host.name.as_str(), self.chief.name.as_str()].iter().any(|n| names.contains(n)) || self.host.name == self.chief.name {
            return bad("host and chief names must differ from each other and from researchers".into());
        }
        let mut order: Vec<&str> = self.base_order.iter().map(String::as_str).collect();
        order.sort_unstable();
        if order != names {
            return bad("base_order must be a permutation of the researcher names".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateOutcome {
    pub final_hypothesis: Hypothesis,
    /// True when the chief picked a hypothesis with the maximal last-round total.
    pub selection_consistent: bool,
    pub hypotheses: Vec<Hypothesis>,
    pub rebuttals: Vec<Rebuttal>,
    /// (researcher, round, card) in emission order.
    pub scores: Vec<(String, u32, ScoreCard)>,
    pub transcript: Vec<crate::agent::TranscriptEvent>,
    pub base_order: Vec<String>,
}

impl DebateOutcome {
    /// Per-researcher (round, total) series in base order.
    pub fn score_series(&self) -> Vec<(String, Vec<(u32, u8)>)> {
        self.base_order
            .iter()
            .map(|name| {
                let s = self
                    .scores
                    .iter()
                    .filter(|(a, _, _)| a == name)
                    .map(|(_, r, c)| (*r, c.total))
                    .collect();
                (name.clone(), s)
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum DebateError {
    #[error("protocol violation: {agent} emitted {got} during {phase} of round {round}")]
    ProtocolViolation {
        agent: String,
        round: u32,
        phase: String,
        got: String,
    },
    #[error("unknown agent {0}")]
    UnknownAgent(String),
    #[error("unknown hypothesis id {0}")]
    UnknownHypothesis(u64),
    #[error("invalid debate config: {0}")]
    InvalidConfig(String),
    #[error("retrieval provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}
