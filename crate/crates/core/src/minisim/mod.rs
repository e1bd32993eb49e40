//! MiniAtmos: a deterministic single-layer shallow-water toy model with
//! moisture, precipitation, surface-temperature forcing and soil-moisture
//! coupling, driven by a namelist and a preprocess -> init -> run pipeline.

pub mod cases;
pub mod dataset;
pub mod dynamics;
pub mod input;
pub mod namelist;
pub mod stages;

use std::path::Path;

use thiserror::Error;

pub use dataset::{read_dataset, read_header, write_dataset, DatasetError, GridDataset, GridGeometry, VarInfo};
pub use dynamics::{diagnose, run_simulation, step, GridState, OUTPUT_VARS};
pub use namelist::{Namelist, NamelistError, SimConfig, Value, METERS_PER_DEGREE};
pub use stages::{perturb_field, preprocess, real_init, PerturbOp};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("prefix mismatch: no input files named '{found}.NNN' in {dir}; expected prefix {expected}")]
    PrefixMismatch {
        found: String,
        expected: String,
        dir: String,
    },
    #[error("missing variable table: {0} not found")]
    MissingVariableTable(String),
    #[error("vertical level mismatch: e_vert={e_vert} but input has {levels} levels")]
    VerticalLevelMismatch { e_vert: u32, levels: u32 },
    #[error("process overflow: nproc={requested} exceeds available slots {available}")]
    ParallelOverflow { requested: usize, available: usize },
    #[error("CFL violation: courant number {0:.4} exceeds 0.5")]
    CflViolation(f64),
    #[error("non-finite value in {var} at step {step}; state dumped to {dump}")]
    NonFinite { step: usize, var: String, dump: String },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("fatal: unexpected internal failure in {0}")]
    Internal(String),
    #[error(transparent)]
    Namelist(#[from] NamelistError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
}

impl SimError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        SimError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        }
    }
}
