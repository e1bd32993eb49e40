use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::OrchestratorError;
use crate::agent::PlannedSubtask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubtaskStatus {
    Pending,
    Running,
    Done,
    Failed,
    Repaired,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtask {
    pub id: u32,
    pub description: String,
    pub worker_spec: String,
    pub depends_on: Vec<u32>,
    pub artifacts: Vec<String>,
    pub status: SubtaskStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roadmap {
    pub goal: String,
    pub subtasks: Vec<Subtask>,
    pub revision: u32,
}

/// Worker specs the planner may instantiate.
pub const KNOWN_WORKER_SPECS: [&str; 9] = [
    "wps_configurer",
    "fnl_processor",
    "wps_preprocessor",
    "wrf_real_executor",
    "wrf_main_simulator",
    "trajectory_analyzer",
    "field_perturber",
    "data_analyst",
    "visualizer",
];

impl Roadmap {
    /// Validates ids, dependencies (known, acyclic) and worker specs.
    pub fn from_plan(goal: &str, plan: &[PlannedSubtask], known_specs: &[&str]) -> Result<Self, OrchestratorError> {
        let bad = |m: String| Err(OrchestratorError::InvalidPlan(m));
        if plan.is_empty() {
            return bad("roadmap has no subtasks".into());
        }
        let ids: BTreeSet<u32> = plan.iter().map(|s| s.id).collect();
        if ids.len() != plan.len() {
            return bad("duplicate subtask ids".into());
        }
        for s in plan {
            if !known_specs.contains(&s.worker_spec.as_str()) {
                return bad(format!("unknown worker_spec `{}` in subtask {}", s.worker_spec, s.id));
            }
            for d in &s.depends_on {
                if !ids.contains(d) {
                    return bad(format!("subtask {} depends on unknown id {d}", s.id));
                }
            }
            for a in &s.artifacts {
                let p = std::path::Path::new(a);
                if p.is_absolute() || p.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
                    return bad(format!("artifact `{a}` escapes the workdir"));
                }
            }
        }
        let rm = Roadmap {
            goal: goal.to_string(),
            subtasks: plan
                .iter()
                .map(|p| Subtask {
                    id: p.id,
                    description: p.description.clone(),
                    worker_spec: p.worker_spec.clone(),
                    depends_on: p.depends_on.iter().copied().collect::<BTreeSet<_>>().into_iter().collect(),
                    artifacts: p.artifacts.clone(),
                    status: SubtaskStatus::Pending,
                })
                .collect(),
            revision: 0,
        };
        rm.topological_order()?;
        Ok(rm)
    }

    /// Kahn's algorithm with smallest-id-first tie-breaking.
    pub fn topological_order(&self) -> Result<Vec<u32>, OrchestratorError> {
        let distinct = |s: &Subtask| s.depends_on.iter().collect::<BTreeSet<_>>().len();
        let mut indeg: BTreeMap<u32, usize> = self.subtasks.iter().map(|s| (s.id, distinct(s))).collect();
        let mut ready: BTreeSet<u32> = indeg.iter().filter(|(_, d)| **d == 0).map(|(id, _)| *id).collect();
        let mut order = Vec::with_capacity(self.subtasks.len());
        while let Some(id) = ready.pop_first() {
            order.push(id);
            for s in self.subtasks.iter().filter(|s| s.depends_on.contains(&id)) {
                let d = indeg.get_mut(&s.id).expect("known id");
                *d -= 1;
                if *d == 0 {
                    ready.insert(s.id);
                }
            }
        }
        if order.len() != self.subtasks.len() {
            return Err(OrchestratorError::InvalidPlan("dependency cycle".into()));
        }
        Ok(order)
    }

    pub fn get(&self, id: u32) -> &Subtask {
        self.subtasks.iter().find(|s| s.id == id).expect("subtask id exists")
    }

    pub fn get_mut(&mut self, id: u32) -> &mut Subtask {
        self.subtasks.iter_mut().find(|s| s.id == id).expect("subtask id exists")
    }

    /// Pending (or requeued) subtasks whose dependencies are all Done, in id order.
    pub fn ready(&self) -> Vec<u32> {
        self.subtasks
            .iter()
            .filter(|s| matches!(s.status, SubtaskStatus::Pending | SubtaskStatus::Repaired))
            .filter(|s| s.depends_on.iter().all(|d| self.get(*d).status == SubtaskStatus::Done))
            .map(|s| s.id)
            .collect()
    }

    /// Worker name for a subtask: the spec itself when unique in the
    /// roadmap, otherwise `spec#id`.
    pub fn worker_name(&self, id: u32) -> String {
        let spec = &self.get(id).worker_spec;
        if self.subtasks.iter().filter(|s| &s.worker_spec == spec).count() == 1 {
            spec.clone()
        } else {
            format!("{spec}#{id}")
        }
    }
}
