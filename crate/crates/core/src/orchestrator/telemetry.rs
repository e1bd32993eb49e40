//! Append-only session ledger: call records, subtask status changes,
//! state revisions and repairs, with one global ordering authority.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::registry::ToolCategory;
use super::roadmap::SubtaskStatus;
use crate::recovery::RepairAction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CallKind {
    ReasoningPlanning,
    ToolExec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Ok,
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub seq: u64,
    /// Seconds since session start (wall clock) or the seq value (logical clock).
    pub wallclock: f64,
    pub agent: String,
    pub kind: CallKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<ToolCategory>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Call(CallRecord),
    Subtask { subtask: u32, status: SubtaskStatus },
    StateRevision { subtask: u32, pass: bool, mechanical: bool, note: String, revision: u32 },
    Repair { seq: u64, class: String, action: RepairAction, subtask: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    Wall,
    /// Timestamps equal the seq number; fully reproducible logs.
    Logical,
}

pub struct Ledger {
    clock: Clock,
    start: Instant,
    inner: Mutex<(u64, Vec<SessionEvent>)>,
}

impl Ledger {
    pub fn new(clock: Clock) -> Self {
        Self {
            clock,
            start: Instant::now(),
            inner: Mutex::new((0, Vec::new())),
        }
    }

    /// Appends a call record, assigning the next seq under the ledger lock.
    pub fn call(&self, agent: &str, kind: CallKind, tool: Option<(&str, ToolCategory)>, outcome: Outcome) -> u64 {
        let mut g = self.inner.lock().expect("ledger lock");
        g.0 += 1;
        let seq = g.0;
        let wallclock = match self.clock {
            Clock::Wall => self.start.elapsed().as_secs_f64(),
            Clock::Logical => seq as f64,
        };
        g.1.push(SessionEvent::Call(CallRecord {
            seq,
            wallclock,
            agent: agent.to_string(),
            kind,
            tool: tool.map(|t| t.0.to_string()),
            category: tool.map(|t| t.1),
            outcome,
        }));
        seq
    }

    pub fn event(&self, e: SessionEvent) {
        self.inner.lock().expect("ledger lock").1.push(e);
    }

    pub fn events(&self) -> Vec<SessionEvent> {
        self.inner.lock().expect("ledger lock").1.clone()
    }

    pub fn records(&self) -> Vec<CallRecord> {
        records_of(&self.events())
    }
}

pub fn records_of(events: &[SessionEvent]) -> Vec<CallRecord> {
    events
        .iter()
        .filter_map(|e| match e {
            SessionEvent::Call(c) => Some(c.clone()),
            _ => None,
        })
        .collect()
}

pub fn events_ndjson(events: &[SessionEvent]) -> String {
    let mut s = String::new();
    for e in events {
        s.push_str(&serde_json::to_string(e).expect("event serializes"));
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetrySummary {
    pub total: usize,
    pub per_agent: BTreeMap<String, usize>,
    pub per_kind: BTreeMap<String, usize>,
    pub per_category: BTreeMap<String, usize>,
    pub errors: usize,
    /// (wallclock, running count).
    pub cumulative: Vec<(f64, usize)>,
}

pub fn telemetry_summary(records: &[CallRecord]) -> TelemetrySummary {
    let mut per_agent = BTreeMap::new();
    let mut per_kind = BTreeMap::new();
    let mut per_category = BTreeMap::new();
    let mut sorted: Vec<&CallRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.seq);
    let mut cumulative = Vec::with_capacity(records.len());
    let mut t_max = f64::NEG_INFINITY;
    for (n, r) in sorted.iter().enumerate() {
        *per_agent.entry(r.agent.clone()).or_insert(0) += 1;
        *per_kind.entry(format!("{:?}", r.kind)).or_insert(0) += 1;
        if let Some(c) = r.category {
            *per_category.entry(format!("{c:?}")).or_insert(0) += 1;
        }
        // Concurrent workers may stamp slightly out of order; keep the series monotone.
        t_max = t_max.max(r.wallclock);
        cumulative.push((t_max, n + 1));
    }
    TelemetrySummary {
        total: records.len(),
        per_agent,
        per_kind,
        per_category,
        errors: records.iter().filter(|r| matches!(r.outcome, Outcome::Error(_))).count(),
        cumulative,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_partitions() {
        let l = Ledger::new(Clock::Logical);
        for _ in 0..28 {
            l.call("MetaPlanner", CallKind::ReasoningPlanning, None, Outcome::Ok);
        }
        let counts = [("wps_configurer", 15), ("fnl_processor", 23), ("wrf_real_executor", 38), ("wrf_main_simulator", 20), ("trajectory_analyzer", 40)];
        for (a, n) in counts {
            for _ in 0..n {
                l.call(a, CallKind::ToolExec, Some(("list_directory", ToolCategory::Basic)), Outcome::Ok);
            }
        }
        let s = telemetry_summary(&l.records());
        assert_eq!(s.total, 164);
        assert_eq!(s.per_agent["MetaPlanner"], 28);
        assert_eq!(s.per_agent["trajectory_analyzer"], 40);
        assert_eq!(s.per_agent.values().sum::<usize>(), s.total);
        assert_eq!(s.per_kind.values().sum::<usize>(), s.total);
        assert!(s.cumulative.windows(2).all(|w| w[0].0 <= w[1].0 && w[1].1 == w[0].1 + 1));
        assert_eq!(telemetry_summary(&[]).total, 0);
    }
}
