use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::retrieval::CorpusProvider;
use super::schedule::speaking_order;
use super::{Citation, DebateConfig, DebateError, DebateOutcome, Hypothesis, Rebuttal, ScoreCard};
use crate::agent::{AgentIdentity, AgentOutput, AgentSession, Document, EventPayload, TranscriptEvent};

struct Run<'a> {
    cfg: &'a DebateConfig,
    session: &'a AgentSession,
    transcript: Vec<TranscriptEvent>,
    hypotheses: Vec<Hypothesis>,
    rebuttals: Vec<Rebuttal>,
    scores: Vec<(String, u32, ScoreCard)>,
    /// Documents shown to each researcher, for citation hashing.
    retrieved: Vec<(String, Vec<Document>)>,
}

fn abstract_hash(text: &str) -> String {
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

impl Run<'_> {
    fn push(&mut self, round: u32, phase: &str, agent: &str, output: EventPayload) {
        let seq = self.transcript.len() as u64 + 1;
        self.transcript.push(TranscriptEvent {
            seq,
            round,
            phase: phase.to_string(),
            agent: agent.to_string(),
            output,
        });
    }

    fn ask(&self, who: &AgentIdentity) -> Result<AgentOutput, DebateError> {
        Ok(self.session.next_action(who, &self.transcript)?)
    }

    fn violation(who: &str, round: u32, phase: &str, got: &AgentOutput) -> DebateError {
        DebateError::ProtocolViolation {
            agent: who.to_string(),
            round,
            phase: phase.to_string(),
            got: got.variant().to_string(),
        }
    }

    fn researcher(&self, name: &str) -> &AgentIdentity {
        self.cfg
            .researchers
            .iter()
            .find(|r| r.name == name)
            .expect("base_order validated against researchers")
    }

    fn latest(&self, name: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().rev().find(|h| h.author == name)
    }

    fn cite(&self, name: &str, titles: &[String]) -> Vec<Citation> {
        let docs = self
            .retrieved
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d.as_slice())
            .unwrap_or(&[]);
        titles
            .iter()
            .map(|t| Citation {
                title: t.clone(),
                abstract_hash: docs
                    .iter()
                    .find(|d| &d.title == t)
                    .map(|d| abstract_hash(&d.abstract_text))
                    .unwrap_or_default(),
            })
            .collect()
    }

    fn new_hypothesis(&mut self, author: &str, round: u32, statement: String, citations: Vec<Citation>) {
        let id = self.hypotheses.len() as u64 + 1;
        self.hypotheses.push(Hypothesis {
            id,
            author: author.to_string(),
            round,
            statement,
            citations,
        });
    }

    fn score_round(&mut self, round: u32) -> Result<(), DebateError> {
        let host = self.cfg.host.clone();
        for name in self.cfg.base_order.clone() {
            let out = self.ask(&host)?;
            let card = match &out {
                AgentOutput::Score {
                    scientificity,
                    rationality,
                    novelty,
                    effectiveness,
                } => ScoreCard::new([*scientificity, *rationality, *novelty, *effectiveness])
                    .ok_or_else(|| Self::violation(&host.name, round, "scoring", &out))?,
                other => return Err(Self::violation(&host.name, round, "scoring", other)),
            };
            self.push(round, "scoring", &host.name, EventPayload::Agent(out));
            self.scores.push((name, round, card));
        }
        Ok(())
    }
}

/// Runs the full debate schedule against the session's backend.
pub fn run_debate(cfg: &DebateConfig, session: &AgentSession) -> Result<DebateOutcome, DebateError> {
    cfg.validate()?;
    let provider = cfg
        .retrieval
        .as_ref()
        .map(|r| CorpusProvider::open(&r.provider).map(|p| (p, r.k)))
        .transpose()?;
    let mut run = Run {
        cfg,
        session,
        transcript: Vec::new(),
        hypotheses: Vec::new(),
        rebuttals: Vec::new(),
        scores: Vec::new(),
        retrieved: Vec::new(),
    };

    for name in cfg.base_order.clone() {
        let who = run.researcher(&name).clone();
        if let Some((p, k)) = &provider {
            let query = match &who.expertise {
                Some(e) => format!("{} {e}", cfg.topic),
                None => cfg.topic.clone(),
            };
            let documents = p.retrieve(&query, *k);
            run.retrieved.push((name.clone(), documents.clone()));
            run.push(1, "retrieval", &name, EventPayload::Retrieval { documents });
        }
        let out = run.ask(&who)?;
        match &out {
            AgentOutput::ProposeHypothesis { statement, citations } => {
                let cites = run.cite(&name, citations);
                run.new_hypothesis(&name, 1, statement.clone(), cites);
            }
            other => return Err(Run::violation(&name, 1, "proposal", other)),
        }
        run.push(1, "proposal", &name, EventPayload::Agent(out));
    }
    run.score_round(1)?;

    for round in 2..=cfg.rounds {
        let prev: Vec<Rebuttal> = run.rebuttals.iter().filter(|r| r.round == round - 1).cloned().collect();
        let order = speaking_order(&cfg.base_order, &prev)?;
        if cfg.rebuttal_enabled && cfg.researchers.len() >= 2 {
            for name in &order {
                let who = run.researcher(name).clone();
                let out = run.ask(&who)?;
                match &out {
                    AgentOutput::Rebut { target, critique } if target != name && cfg.base_order.contains(target) => {
                        run.rebuttals.push(Rebuttal {
                            from: name.clone(),
                            target: target.clone(),
                            round,
                            critique: critique.clone(),
                        });
                    }
                    other => return Err(Run::violation(name, round, "rebuttal", other)),
                }
                run.push(round, "rebuttal", name, EventPayload::Agent(out));
            }
        }
        for name in &order {
            let who = run.researcher(name).clone();
            let out = run.ask(&who)?;
            match &out {
                AgentOutput::Revise { statement } => {
                    let cites = run.latest(name).map(|h| h.citations.clone()).unwrap_or_default();
                    run.new_hypothesis(name, round, statement.clone(), cites);
                }
                other => return Err(Run::violation(name, round, "revision", other)),
            }
            run.push(round, "revision", name, EventPayload::Agent(out));
        }
        run.score_round(round)?;
    }

    let chief = cfg.chief.clone();
    let out = run.ask(&chief)?;
    if !matches!(out, AgentOutput::SelectFinal { .. }) {
        return Err(Run::violation(&chief.name, cfg.rounds, "selection", &out));
    }
    let last: Vec<Hypothesis> = run.hypotheses.iter().filter(|h| h.round == cfg.rounds).cloned().collect();
    let last_scores: Vec<(String, ScoreCard)> = run
        .scores
        .iter()
        .filter(|(_, r, _)| *r == cfg.rounds)
        .map(|(a, _, c)| (a.clone(), *c))
        .collect();
    let (final_hypothesis, selection_consistent) = select_final(&last, &last_scores, &out)?;
    run.push(cfg.rounds, "selection", &chief.name, EventPayload::Agent(out));

    Ok(DebateOutcome {
        final_hypothesis,
        selection_consistent,
        hypotheses: run.hypotheses,
        rebuttals: run.rebuttals,
        scores: run.scores,
        transcript: run.transcript,
        base_order: cfg.base_order.clone(),
    })
}

/// Resolves the chief's choice among the last-round hypotheses. The flag is
/// true when the choice has the maximal total score.
pub fn select_final(
    last_round: &[Hypothesis],
    last_scores: &[(String, ScoreCard)],
    chief_output: &AgentOutput,
) -> Result<(Hypothesis, bool), DebateError> {
    let AgentOutput::SelectFinal { hypothesis_id, .. } = chief_output else {
        return Err(DebateError::ProtocolViolation {
            agent: "chief".into(),
            round: 0,
            phase: "selection".into(),
            got: chief_output.variant().into(),
        });
    };
    let chosen = last_round
        .iter()
        .find(|h| h.id == *hypothesis_id)
        .ok_or(DebateError::UnknownHypothesis(*hypothesis_id))?;
    let total_of = |author: &str| last_scores.iter().find(|(a, _)| a == author).map(|(_, c)| c.total);
    let best = last_round.iter().filter_map(|h| total_of(&h.author)).max();
    let consistent = total_of(&chosen.author) == best;
    Ok((chosen.clone(), consistent))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub agent: String,
    pub round: u32,
    pub total: u8,
}

/// One row per (researcher, scored round), ordered by round then base order.
pub fn export_score_curve(outcome: &DebateOutcome) -> Vec<ScoreRow> {
    let mut rows: Vec<(u32, usize, ScoreRow)> = outcome
        .scores
        .iter()
        .map(|(agent, round, card)| {
            let pos = outcome.base_order.iter().position(|n| n == agent).unwrap_or(usize::MAX);
            (
                *round,
                pos,
                ScoreRow {
                    agent: agent.clone(),
                    round: *round,
                    total: card.total,
                },
            )
        })
        .collect();
    rows.sort_by_key(|(r, p, _)| (*r, *p));
    rows.into_iter().map(|(_, _, row)| row).collect()
}

pub fn score_curve_csv(rows: &[ScoreRow]) -> String {
    let mut s = String::from("agent,round,total\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.agent, r.round, r.total);
    }
    s
}

pub fn transcript_ndjson(events: &[TranscriptEvent]) -> String {
    let mut s = String::new();
    for e in events {
        s.push_str(&serde_json::to_string(e).expect("transcript event serializes"));
        s.push('\n');
    }
    s
}
