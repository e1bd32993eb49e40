//! The plan, schedule, execute, verify loop.

use std::collections::{BTreeMap, VecDeque};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::registry::ToolRegistry;
use super::roadmap::{Roadmap, SubtaskStatus, KNOWN_WORKER_SPECS};
use super::telemetry::{telemetry_summary, CallKind, Clock, Ledger, Outcome, SessionEvent, TelemetrySummary};
use super::tools::{execute, Args, Blackboard, ToolContext};
use super::{select_mode, Mode, ModeTriggers, OrchestratorError, PLANNER, SIMPLE_AGENT};
use crate::agent::{AgentIdentity, AgentOutput, AgentRole, AgentSession, Backend, EventPayload, TranscriptEvent};
use crate::minisim::read_dataset;
use crate::recovery::{classify_failure, propose_repair, RepairAction, RepairContext};

type Result<T> = std::result::Result<T, OrchestratorError>;

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Upper bound on subtasks executing at once.
    pub workers: usize,
    /// Repairs per subtask run, and verdict-driven re-runs per subtask.
    pub repair_budget: u32,
    pub simple_budget: usize,
    pub worker_budget: usize,
    pub triggers: ModeTriggers,
    pub clock: Clock,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            workers: 2,
            repair_budget: 3,
            simple_budget: 64,
            worker_budget: 256,
            triggers: ModeTriggers::default(),
            clock: Clock::Logical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleReport {
    pub request: String,
    pub tools: Vec<String>,
    pub artifacts: Vec<String>,
    pub final_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtaskReport {
    pub id: u32,
    pub worker: String,
    pub worker_spec: String,
    pub status: SubtaskStatus,
    pub tool_calls: usize,
    pub repairs: u32,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexReport {
    pub roadmap: Roadmap,
    pub subtasks: Vec<SubtaskReport>,
    pub artifacts: Vec<String>,
    pub final_text: String,
    pub summary: TelemetrySummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode")]
pub enum RunReport {
    Simple(SimpleReport),
    Complex(ComplexReport),
}

struct WorkerOutcome {
    tool_calls: usize,
    repairs: u32,
    artifacts: Vec<String>,
}

pub struct Engine {
    session: AgentSession,
    registry: ToolRegistry,
    ctx: ToolContext,
    ledger: Ledger,
    cfg: EngineConfig,
    transcript: Mutex<Vec<TranscriptEvent>>,
}

fn push_unique(v: &mut Vec<String>, s: String) {
    if !v.contains(&s) {
        v.push(s);
    }
}

fn repair_call(action: &RepairAction) -> Args {
    let v = match action {
        RepairAction::EditNamelist { key, value } => json!({"key": key, "value": value}),
        RepairAction::ReduceParallelism { cap } => json!({"key": "nproc", "value": cap.to_string()}),
        RepairAction::RelinkTable { path } => json!({"path": path}),
        RepairAction::RealignTensor { axis, target_len } => json!({"axis": axis, "target_len": target_len}),
        RepairAction::RerunStage { stage } => json!({"stage": stage}),
    };
    serde_json::from_value(v).expect("object")
}

impl Engine {
    pub fn new(backend: Arc<dyn Backend>, ctx: ToolContext, cfg: EngineConfig) -> Self {
        Self {
            session: AgentSession::new(backend),
            registry: ToolRegistry::standard(),
            ledger: Ledger::new(cfg.clock),
            ctx,
            cfg,
            transcript: Mutex::new(Vec::new()),
        }
    }

    pub fn with_registry(mut self, registry: ToolRegistry) -> Self {
        self.registry = registry;
        self
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn context(&self) -> &ToolContext {
        &self.ctx
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn transcript(&self) -> Vec<TranscriptEvent> {
        self.transcript.lock().expect("transcript lock").clone()
    }

    fn push(&self, phase: &str, agent: &str, output: EventPayload) {
        let mut t = self.transcript.lock().expect("transcript lock");
        let seq = t.len() as u64 + 1;
        t.push(TranscriptEvent { seq, round: 0, phase: phase.into(), agent: agent.into(), output });
    }

    /// Resolves the mode and runs the request to completion.
    pub fn run(&self, request: &str, override_mode: Option<Mode>) -> Result<RunReport> {
        match select_mode(request, override_mode, &self.cfg.triggers) {
            Mode::Simple => self.run_simple(request).map(RunReport::Simple),
            Mode::Complex => {
                let roadmap = self.plan_roadmap(request)?;
                self.run_complex(roadmap).map(RunReport::Complex)
            }
        }
    }

    /// Runs one tool for `agent`, appending exactly one ToolExec record when
    /// the call reaches the tool. Returns the record's seq with the result.
    fn exec(&self, agent: &AgentIdentity, tool: &str, args: &Args, bb: &mut Blackboard) -> (u64, Result<Value>) {
        if agent.role == AgentRole::MetaPlanner {
            return (0, Err(OrchestratorError::PlannerMayNotExecute(agent.name.clone())));
        }
        let Some(category) = self.registry.category(tool) else {
            return (0, Err(OrchestratorError::UnknownTool(tool.to_string())));
        };
        if let Err(msg) = self.registry.validate(tool, args) {
            let seq = self.ledger.call(&agent.name, CallKind::ToolExec, Some((tool, category)), Outcome::Error("ArgValidation".into()));
            return (seq, Err(OrchestratorError::ArgValidation { tool: tool.into(), msg }));
        }
        match execute(&self.ctx, bb, tool, args) {
            Ok(v) => (self.ledger.call(&agent.name, CallKind::ToolExec, Some((tool, category)), Outcome::Ok), Ok(v)),
            Err(message) => {
                let class = classify_failure(tool, &message);
                let seq = self.ledger.call(&agent.name, CallKind::ToolExec, Some((tool, category)), Outcome::Error(class.name().into()));
                (seq, Err(OrchestratorError::ToolError { tool: tool.into(), class, message }))
            }
        }
    }

    pub fn invoke_tool(&self, agent: &AgentIdentity, tool: &str, args: &Args, bb: &mut Blackboard) -> Result<Value> {
        self.exec(agent, tool, args, bb).1
    }

    pub fn run_simple(&self, request: &str) -> Result<SimpleReport> {
        let me = AgentIdentity::new(SIMPLE_AGENT, AgentRole::Worker);
        let mut bb = Blackboard::default();
        let mut tools = Vec::new();
        let mut artifacts = Vec::new();
        self.push("request", "user", EventPayload::Agent(AgentOutput::FinalResponse { text: request.into() }));
        let marker = self.invoke_tool(&me, "enter_easy_task_mode", &Args::new(), &mut bb)?;
        self.push("simple", SIMPLE_AGENT, EventPayload::ToolResult { tool: "enter_easy_task_mode".into(), ok: true, result: marker });
        tools.push("enter_easy_task_mode".to_string());
        let mut calls = 0;
        loop {
            if calls >= self.cfg.simple_budget {
                return Err(OrchestratorError::LoopBudgetExhausted { agent: me.name, budget: self.cfg.simple_budget });
            }
            calls += 1;
            let out = self.session.next_action(&me, &self.transcript())?;
            match out {
                AgentOutput::RequestTool { tool, args } => {
                    let v = self.invoke_tool(&me, &tool, &args, &mut bb)?;
                    if let Some(p) = v.get("artifact").and_then(Value::as_str) {
                        push_unique(&mut artifacts, p.to_string());
                    }
                    self.push("simple", SIMPLE_AGENT, EventPayload::ToolResult { tool: tool.clone(), ok: true, result: v });
                    tools.push(tool);
                }
                AgentOutput::FinalResponse { text } => {
                    let args: Args = [("text".to_string(), Value::String(text.clone()))].into();
                    self.invoke_tool(&me, "generate_response", &args, &mut bb)?;
                    tools.push("generate_response".into());
                    return Ok(SimpleReport { request: request.into(), tools, artifacts, final_text: text });
                }
                other => {
                    return Err(OrchestratorError::ProtocolViolation {
                        agent: me.name,
                        expected: "RequestTool or FinalResponse".into(),
                        got: other.variant().into(),
                    })
                }
            }
        }
    }

    /// Asks the planner until it produces the wanted variant. Each ask is
    /// one ReasoningPlanning record; a FinalResponse received while a plan
    /// or verdict is wanted is kept as an interim note.
    fn ask_planner(&self, phase: &str, want: &str) -> Result<AgentOutput> {
        let me = AgentIdentity::new(PLANNER, AgentRole::MetaPlanner);
        for _ in 0..self.cfg.worker_budget {
            let out = self.session.next_action(&me, &self.transcript())?;
            self.ledger.call(PLANNER, CallKind::ReasoningPlanning, None, Outcome::Ok);
            self.push(phase, PLANNER, EventPayload::Agent(out.clone()));
            match &out {
                o if o.variant() == want => return Ok(out),
                AgentOutput::FinalResponse { .. } => continue,
                AgentOutput::RequestTool { .. } => return Err(OrchestratorError::PlannerMayNotExecute(PLANNER.into())),
                o => {
                    return Err(OrchestratorError::ProtocolViolation {
                        agent: PLANNER.into(),
                        expected: want.into(),
                        got: o.variant().into(),
                    })
                }
            }
        }
        Err(OrchestratorError::LoopBudgetExhausted { agent: PLANNER.into(), budget: self.cfg.worker_budget })
    }

    pub fn plan_roadmap(&self, goal: &str) -> Result<Roadmap> {
        self.push("goal", "user", EventPayload::Agent(AgentOutput::FinalResponse { text: goal.into() }));
        match self.ask_planner("planning", "PlanRoadmap")? {
            AgentOutput::PlanRoadmap { subtasks } => Roadmap::from_plan(goal, &subtasks, &KNOWN_WORKER_SPECS),
            _ => unreachable!("ask_planner returns the wanted variant"),
        }
    }

    /// Drives one dedicated worker through its subtask, repairing
    /// classified tool failures and replaying the subtask from its first
    /// call after each repair.
    fn run_worker(&self, roadmap: &Roadmap, id: u32) -> Result<WorkerOutcome> {
        let st = roadmap.get(id);
        let name = roadmap.worker_name(id);
        let me = AgentIdentity::worker(&name, &st.worker_spec);
        let mut local = vec![TranscriptEvent {
            seq: 1,
            round: roadmap.revision,
            phase: "assignment".into(),
            agent: PLANNER.into(),
            output: EventPayload::Agent(AgentOutput::FinalResponse { text: st.description.clone() }),
        }];
        let mut bb = Blackboard::default();
        let mut history: Vec<(String, Args)> = Vec::new();
        let mut artifacts = Vec::new();
        let mut repairs = 0u32;
        let mut tool_calls = 0usize;
        loop {
            if tool_calls >= self.cfg.worker_budget {
                return Err(OrchestratorError::LoopBudgetExhausted { agent: name, budget: self.cfg.worker_budget });
            }
            let out = self.session.next_action(&me, &local)?;
            let (tool, args) = match out {
                AgentOutput::RequestTool { tool, args } => (tool, args),
                AgentOutput::FinalResponse { text } => {
                    self.ledger.call(&name, CallKind::ReasoningPlanning, None, Outcome::Ok);
                    self.push(&name, &name, EventPayload::Agent(AgentOutput::FinalResponse { text }));
                    return Ok(WorkerOutcome { tool_calls, repairs, artifacts });
                }
                other => {
                    return Err(OrchestratorError::ProtocolViolation {
                        agent: name,
                        expected: "RequestTool or FinalResponse".into(),
                        got: other.variant().into(),
                    })
                }
            };
            tool_calls += 1;
            let mut queue = VecDeque::from([(tool, args)]);
            while let Some((tool, args)) = queue.pop_front() {
                let (seq, res) = self.exec(&me, &tool, &args, &mut bb);
                match res {
                    Ok(v) => {
                        if let Some(p) = v.get("artifact").and_then(Value::as_str) {
                            push_unique(&mut artifacts, p.to_string());
                        }
                        let ev = EventPayload::ToolResult { tool: tool.clone(), ok: true, result: v };
                        local.push(TranscriptEvent {
                            seq: local.len() as u64 + 1,
                            round: roadmap.revision,
                            phase: "execution".into(),
                            agent: name.clone(),
                            output: ev.clone(),
                        });
                        self.push(&name, &name, ev);
                        history.push((tool, args));
                    }
                    Err(OrchestratorError::ToolError { class, message, .. }) => {
                        if repairs >= self.cfg.repair_budget {
                            return Err(OrchestratorError::SubtaskFailed {
                                id,
                                reason: format!("repair budget of {} exhausted; last error: {message}", self.cfg.repair_budget),
                            });
                        }
                        repairs += 1;
                        self.ledger.event(SessionEvent::Subtask { subtask: id, status: SubtaskStatus::Failed });
                        let rc = RepairContext { message: &message, workdir: &self.ctx.workdir };
                        let action = propose_repair(class, &rc).unwrap_or(RepairAction::RerunStage { stage: tool.clone() });
                        self.invoke_tool(&me, action.tool(), &repair_call(&action), &mut bb).map_err(|e| {
                            OrchestratorError::SubtaskFailed { id, reason: format!("repair {} failed: {e}", action.tool()) }
                        })?;
                        self.ledger.event(SessionEvent::Repair { seq, class: class.name().into(), action, subtask: id });
                        self.ledger.event(SessionEvent::Subtask { subtask: id, status: SubtaskStatus::Repaired });
                        self.ledger.event(SessionEvent::Subtask { subtask: id, status: SubtaskStatus::Running });
                        // Resume from the first call on a clean blackboard.
                        let realign = bb.realign.take();
                        bb = Blackboard { realign, ..Blackboard::default() };
                        let mut replay: VecDeque<(String, Args)> = history.drain(..).collect();
                        replay.push_back((tool, args));
                        replay.extend(queue.drain(..));
                        queue = replay;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    /// Mechanical artifact checks, then (only if they pass) the planner's
    /// verdict. Appends exactly one StateRevision event.
    fn state_revision(&self, roadmap: &Roadmap, id: u32, produced: &[String]) -> Result<(bool, String)> {
        let mut expected = roadmap.get(id).artifacts.clone();
        for p in produced {
            push_unique(&mut expected, p.clone());
        }
        let mechanical = expected.iter().find_map(|rel| {
            let path = match self.ctx.resolve(rel) {
                Ok(p) => p,
                Err(e) => return Some(e),
            };
            match std::fs::metadata(&path) {
                Err(_) => Some(format!("artifact missing: {rel}")),
                Ok(m) if m.len() == 0 => Some(format!("artifact empty: {rel}")),
                Ok(_) if rel.ends_with(".masd") => read_dataset(&path).err().map(|e| format!("artifact invalid: {rel}: {e}")),
                Ok(_) => None,
            }
        });
        let (pass, note, mech) = match mechanical {
            Some(note) => (false, note, true),
            None => match self.ask_planner("state_revision", "Verdict")? {
                AgentOutput::Verdict { pass, note } => (pass, note, false),
                _ => unreachable!("ask_planner returns the wanted variant"),
            },
        };
        self.ledger.event(SessionEvent::StateRevision {
            subtask: id,
            pass,
            mechanical: mech,
            note: note.clone(),
            revision: roadmap.revision,
        });
        Ok((pass, note))
    }

    pub fn run_complex(&self, mut roadmap: Roadmap) -> Result<ComplexReport> {
        let mut reports: BTreeMap<u32, SubtaskReport> = BTreeMap::new();
        let mut requeues: BTreeMap<u32, u32> = BTreeMap::new();
        loop {
            let ready = roadmap.ready();
            if ready.is_empty() {
                if roadmap.subtasks.iter().all(|s| s.status == SubtaskStatus::Done) {
                    break;
                }
                return Err(OrchestratorError::InvalidPlan("no subtask can be scheduled".into()));
            }
            let batch: Vec<u32> = ready.into_iter().take(self.cfg.workers.max(1)).collect();
            for &id in &batch {
                roadmap.get_mut(id).status = SubtaskStatus::Running;
                self.ledger.event(SessionEvent::Subtask { subtask: id, status: SubtaskStatus::Running });
            }
            let results: Vec<(u32, Result<WorkerOutcome>)> = if batch.len() == 1 {
                vec![(batch[0], self.run_worker(&roadmap, batch[0]))]
            } else {
                let rm = &roadmap;
                std::thread::scope(|s| {
                    let handles: Vec<_> = batch.iter().map(|&id| (id, s.spawn(move || self.run_worker(rm, id)))).collect();
                    handles.into_iter().map(|(id, h)| (id, h.join().expect("worker thread panicked"))).collect()
                })
            };
            // Verification happens in id order, each right after its completion record.
            let mut first_err = None;
            for (id, res) in results {
                match res {
                    Err(e) => {
                        roadmap.get_mut(id).status = SubtaskStatus::Failed;
                        self.ledger.event(SessionEvent::Subtask { subtask: id, status: SubtaskStatus::Failed });
                        self.ledger.event(SessionEvent::StateRevision {
                            subtask: id,
                            pass: false,
                            mechanical: true,
                            note: e.to_string(),
                            revision: roadmap.revision,
                        });
                        first_err.get_or_insert(e);
                    }
                    Ok(o) => {
                        roadmap.get_mut(id).status = SubtaskStatus::Done;
                        self.ledger.event(SessionEvent::Subtask { subtask: id, status: SubtaskStatus::Done });
                        let (pass, note) = self.state_revision(&roadmap, id, &o.artifacts)?;
                        let st = roadmap.get(id);
                        let prev_repairs = reports.get(&id).map_or(0, |r| r.repairs);
                        reports.insert(
                            id,
                            SubtaskReport {
                                id,
                                worker: roadmap.worker_name(id),
                                worker_spec: st.worker_spec.clone(),
                                status: SubtaskStatus::Done,
                                tool_calls: o.tool_calls,
                                repairs: prev_repairs + o.repairs,
                                artifacts: o.artifacts,
                            },
                        );
                        if !pass {
                            let n = requeues.entry(id).or_insert(0);
                            if *n >= self.cfg.repair_budget {
                                first_err.get_or_insert(OrchestratorError::VerificationFailed { id, note });
                                continue;
                            }
                            *n += 1;
                            roadmap.revision += 1;
                            roadmap.get_mut(id).status = SubtaskStatus::Pending;
                            self.ledger.event(SessionEvent::Subtask { subtask: id, status: SubtaskStatus::Pending });
                        }
                    }
                }
            }
            if let Some(e) = first_err {
                return Err(e);
            }
        }
        let final_text = match self.ask_planner("final", "FinalResponse")? {
            AgentOutput::FinalResponse { text } => text,
            _ => unreachable!("ask_planner returns the wanted variant"),
        };
        let mut artifacts = Vec::new();
        for r in reports.values() {
            for a in &r.artifacts {
                push_unique(&mut artifacts, a.clone());
            }
        }
        Ok(ComplexReport {
            roadmap,
            subtasks: reports.into_values().collect(),
            artifacts,
            final_text,
            summary: telemetry_summary(&self.ledger.records()),
        })
    }
}
