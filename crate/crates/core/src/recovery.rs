//! Failure classification, repair proposal and the deterministic fault
//! injection hook used to exercise self-healing.
//!
//! Injected faults corrupt the persistent input a stage consumes (namelist
//! keys, the variable table, a tensor's time axis) and then let the stage
//! fail on its own, so the repair path sees exactly the error a real
//! misconfiguration would produce.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minisim::input::discover_prefixes;
use crate::minisim::stages::ic_levels;
use crate::minisim::{read_dataset, Namelist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FailureClass {
    PrefixMismatch,
    MissingVariableTable,
    VerticalLevelMismatch,
    TensorDimMismatch,
    ParallelOverflow,
    Unknown,
}

impl FailureClass {
    pub const ALL: [FailureClass; 6] = [
        FailureClass::PrefixMismatch,
        FailureClass::MissingVariableTable,
        FailureClass::VerticalLevelMismatch,
        FailureClass::TensorDimMismatch,
        FailureClass::ParallelOverflow,
        FailureClass::Unknown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FailureClass::PrefixMismatch => "PrefixMismatch",
            FailureClass::MissingVariableTable => "MissingVariableTable",
            FailureClass::VerticalLevelMismatch => "VerticalLevelMismatch",
            FailureClass::TensorDimMismatch => "TensorDimMismatch",
            FailureClass::ParallelOverflow => "ParallelOverflow",
            FailureClass::Unknown => "Unknown",
        }
    }

    /// The tool whose invocation triggers an injected fault of this class.
    pub fn injection_site(self) -> &'static str {
        match self {
            FailureClass::PrefixMismatch | FailureClass::MissingVariableTable => "preprocess",
            FailureClass::VerticalLevelMismatch => "real_init",
            FailureClass::TensorDimMismatch => "ingest_tensor",
            FailureClass::ParallelOverflow | FailureClass::Unknown => "run_simulation",
        }
    }
}

impl std::fmt::Display for FailureClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FailureClass {
    type Err = RecoveryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.chars().filter(|c| *c != '_' && *c != '-').collect::<String>().to_lowercase();
        FailureClass::ALL
            .into_iter()
            .find(|c| c.name().to_lowercase() == norm)
            .ok_or_else(|| RecoveryError::UnknownClass(s.to_string()))
    }
}

/// Rule table over the error message; the tool name is advisory only.
pub fn classify_failure(_tool: &str, message: &str) -> FailureClass {
    let m = message.to_lowercase();
    if m.contains("prefix mismatch") || m.contains("expected prefix") {
        FailureClass::PrefixMismatch
    } else if m.contains("missing variable table") || (m.contains("vtable") && m.contains("not found")) {
        FailureClass::MissingVariableTable
    } else if m.contains("e_vert") && m.contains("level") {
        FailureClass::VerticalLevelMismatch
    } else if m.contains("length") && m.contains(" vs ") && m.contains("on axis") {
        FailureClass::TensorDimMismatch
    } else if m.contains("process overflow") || (m.contains("nproc") && m.contains("exceeds")) {
        FailureClass::ParallelOverflow
    } else {
        FailureClass::Unknown
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action")]
pub enum RepairAction {
    EditNamelist { key: String, value: String },
    RelinkTable { path: String },
    RealignTensor { axis: String, target_len: usize },
    ReduceParallelism { cap: usize },
    RerunStage { stage: String },
}

impl RepairAction {
    /// Registered tool that carries out the action.
    pub fn tool(&self) -> &'static str {
        match self {
            RepairAction::EditNamelist { .. } | RepairAction::ReduceParallelism { .. } => "edit_namelist",
            RepairAction::RelinkTable { .. } => "relink_table",
            RepairAction::RealignTensor { .. } => "realign_tensor",
            RepairAction::RerunStage { .. } => "rerun_stage",
        }
    }
}

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("no repair known for failure class {0}")]
    NoRepairKnown(FailureClass),
    #[error("unknown failure class `{0}`")]
    UnknownClass(String),
    #[error("cannot derive repair: {0}")]
    Context(String),
}

/// What the repair planner can look at: the failing message and the workdir.
#[derive(Debug, Clone)]
pub struct RepairContext<'a> {
    pub message: &'a str,
    pub workdir: &'a Path,
}

pub const NAMELIST_PATH: &str = "sim/namelist.input";
pub const IC_PATH: &str = "sim/ic.masd";
pub const INPUTS_DIR: &str = "inputs";

fn parse_lengths(message: &str) -> Option<(usize, usize, String)> {
    let after = &message[message.find("length ")? + 7..];
    let mut words = after.split_whitespace();
    let a = words.next()?.parse().ok()?;
    if words.next()? != "vs" {
        return None;
    }
    let b = words.next()?.parse().ok()?;
    if words.next()? != "on" || words.next()? != "axis" {
        return None;
    }
    let axis = words.next()?.trim_matches(|c: char| !c.is_alphanumeric()).to_string();
    Some((a, b, axis))
}

pub fn propose_repair(class: FailureClass, ctx: &RepairContext<'_>) -> Result<RepairAction, RecoveryError> {
    let err = |m: String| RecoveryError::Context(m);
    match class {
        FailureClass::PrefixMismatch => {
            let dir = ctx.workdir.join(INPUTS_DIR);
            let prefixes = discover_prefixes(&dir).map_err(|e| err(e.to_string()))?;
            let value = prefixes
                .into_iter()
                .next()
                .ok_or_else(|| err(format!("no prefixed input files in {}", dir.display())))?;
            Ok(RepairAction::EditNamelist { key: "prefix".into(), value: format!("'{value}'") })
        }
        FailureClass::MissingVariableTable => {
            let dir = ctx.workdir.join(INPUTS_DIR).join(crate::minisim::cases::VTABLE_LIBRARY_DIR);
            let mut tables: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| err(format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("Vtable.")))
                .collect();
            tables.sort();
            let table = tables.first().ok_or_else(|| err(format!("no Vtable.* in {}", dir.display())))?;
            let rel = table.strip_prefix(ctx.workdir).unwrap_or(table);
            Ok(RepairAction::RelinkTable { path: rel.display().to_string() })
        }
        FailureClass::VerticalLevelMismatch => {
            let ic = read_dataset(ctx.workdir.join(IC_PATH)).map_err(|e| err(e.to_string()))?;
            let levels = ic_levels(&ic).map_err(|e| err(e.to_string()))?;
            Ok(RepairAction::EditNamelist { key: "e_vert".into(), value: levels.to_string() })
        }
        FailureClass::TensorDimMismatch => {
            let (a, b, axis) = parse_lengths(ctx.message).ok_or_else(|| err(format!("no lengths in `{}`", ctx.message)))?;
            Ok(RepairAction::RealignTensor { axis, target_len: a.min(b) })
        }
        FailureClass::ParallelOverflow => {
            let nl = Namelist::load(ctx.workdir.join(NAMELIST_PATH)).map_err(|e| err(e.to_string()))?;
            let current = nl.get("nproc").and_then(|v| v.as_int()).unwrap_or(1).max(1) as usize;
            Ok(RepairAction::ReduceParallelism { cap: (current / 2).max(1) })
        }
        FailureClass::Unknown => Err(RecoveryError::NoRepairKnown(class)),
    }
}

/// Pending injected faults. Each classifiable fault fires once; an
/// `Unknown` fault fires on every visit to its site.
#[derive(Debug, Default)]
pub struct FaultPlan {
    pending: Mutex<BTreeMap<FailureClass, usize>>,
}

impl FaultPlan {
    pub fn new(classes: &[FailureClass]) -> Self {
        let plan = Self::default();
        for &c in classes {
            plan.add(c);
        }
        plan
    }

    pub fn add(&self, class: FailureClass) {
        *self.pending.lock().expect("fault plan lock").entry(class).or_insert(0) += 1;
    }

    /// Consumes (or, for `Unknown`, observes) a pending fault of `class`.
    pub fn take(&self, class: FailureClass) -> bool {
        let mut p = self.pending.lock().expect("fault plan lock");
        match p.get_mut(&class) {
            Some(n) if *n > 0 => {
                if class != FailureClass::Unknown {
                    *n -= 1;
                }
                true
            }
            _ => false,
        }
    }

    /// Faults whose site is `tool`, consumed in class order.
    pub fn take_for_site(&self, tool: &str) -> Vec<FailureClass> {
        FailureClass::ALL
            .into_iter()
            .filter(|c| c.injection_site() == tool)
            .filter(|&c| self.take(c))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.lock().expect("fault plan lock").values().all(|n| *n == 0)
    }
}
