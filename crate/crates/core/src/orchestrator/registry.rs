//! The four tool buses and each tool's argument contract.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ToolCategory {
    PhysicalSimulation,
    TensorAnalysis,
    Visualization,
    Basic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgKind {
    Str,
    Num,
    Int,
    StrOrList,
    Object,
    /// String, integer or object.
    Any,
}

impl ArgKind {
    fn accepts(self, v: &Value) -> bool {
        match self {
            ArgKind::Str => v.is_string(),
            ArgKind::Num => v.is_number(),
            ArgKind::Int => v.is_u64(),
            ArgKind::StrOrList => v.is_string() || v.as_array().is_some_and(|a| !a.is_empty() && a.iter().all(Value::is_string)),
            ArgKind::Object => v.is_object(),
            ArgKind::Any => !v.is_null(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub name: &'static str,
    pub kind: ArgKind,
    pub required: bool,
}

const fn req(name: &'static str, kind: ArgKind) -> Param {
    Param { name, kind, required: true }
}

const fn opt(name: &'static str, kind: ArgKind) -> Param {
    Param { name, kind, required: false }
}

#[derive(Debug, Clone)]
pub struct ToolSpec {
    pub name: &'static str,
    pub category: ToolCategory,
    pub params: &'static [Param],
}

use ArgKind::*;
use ToolCategory::*;

const TOOLS: &[ToolSpec] = &[
    ToolSpec { name: "write_namelist", category: PhysicalSimulation, params: &[req("case", Str), opt("path", Str)] },
    ToolSpec { name: "edit_namelist", category: PhysicalSimulation, params: &[req("key", Str), req("value", Any), opt("path", Str)] },
    ToolSpec { name: "fetch_inputs", category: PhysicalSimulation, params: &[req("case", Str), opt("seed", Int), opt("dir", Str)] },
    ToolSpec { name: "preprocess", category: PhysicalSimulation, params: &[opt("namelist", Str), opt("input_dir", Str), opt("out", Str)] },
    ToolSpec { name: "real_init", category: PhysicalSimulation, params: &[opt("namelist", Str), opt("ic", Str), opt("out", Str)] },
    ToolSpec { name: "run_simulation", category: PhysicalSimulation, params: &[opt("namelist", Str), opt("state", Str), opt("out", Str)] },
    ToolSpec {
        name: "perturb_field",
        category: PhysicalSimulation,
        params: &[req("input", Str), req("output", Str), req("var", Str), req("op", Str), req("value", Num)],
    },
    ToolSpec { name: "inspect_dataset", category: TensorAnalysis, params: &[req("path", Str)] },
    ToolSpec {
        name: "ingest_tensor",
        category: TensorAnalysis,
        params: &[req("path", Str), req("var", StrOrList), opt("time", Any), opt("region", Object), req("as", StrOrList)],
    },
    ToolSpec {
        name: "transform_tensor",
        category: TensorAnalysis,
        params: &[req("op", Str), req("inputs", StrOrList), opt("value", Num), req("as", Str)],
    },
    ToolSpec { name: "locate_feature", category: TensorAnalysis, params: &[req("tensor", Str), req("mode", Str), req("as", Str)] },
    ToolSpec {
        name: "track_feature",
        category: TensorAnalysis,
        params: &[req("tensor", Str), req("mode", Str), opt("radius_km", Num), req("as", Str)],
    },
    ToolSpec { name: "track_compare", category: TensorAnalysis, params: &[req("a", Str), req("b", Str), req("as", Str)] },
    ToolSpec {
        name: "filter_by_geometry",
        category: TensorAnalysis,
        params: &[req("tensor", Str), opt("shape", Object), opt("around", Str), opt("radius_km", Num), opt("half_width_deg", Num), req("as", Str)],
    },
    ToolSpec { name: "area_stat", category: TensorAnalysis, params: &[req("tensor", Str), req("stat", Str), opt("as", Str)] },
    ToolSpec { name: "deficit", category: TensorAnalysis, params: &[req("masked", Str), req("full", Str), opt("as", Str)] },
    ToolSpec {
        name: "radial_profile",
        category: TensorAnalysis,
        params: &[req("tensor", Str), req("center", Str), req("r_max_km", Num), req("n_bins", Int), req("as", Str)],
    },
    ToolSpec { name: "export_csv", category: TensorAnalysis, params: &[req("name", Str), req("path", Str)] },
    ToolSpec { name: "realign_tensor", category: TensorAnalysis, params: &[req("axis", Str), req("target_len", Int)] },
    ToolSpec {
        name: "plot_cartesian_chart",
        category: Visualization,
        params: &[
            req("features", Str),
            opt("scale", Num),
            opt("mark", Str),
            opt("decimals", Int),
            opt("title", Str),
            opt("x_label", Str),
            opt("y_label", Str),
            req("out", Str),
        ],
    },
    ToolSpec {
        name: "plot_spatial_map",
        category: Visualization,
        params: &[
            req("tensor", Str),
            opt("time_index", Int),
            opt("scale", Num),
            req("colormap", Str),
            opt("title", Str),
            opt("trajectory", Str),
            opt("star", Str),
            opt("star_mode", Str),
            opt("decimals", Int),
            opt("rect_from", Str),
            opt("rect_label", Str),
            req("out", Str),
        ],
    },
    ToolSpec { name: "plot_bar_chart", category: Visualization, params: &[req("labels", StrOrList), req("values", Any), opt("title", Str), req("out", Str)] },
    ToolSpec { name: "list_directory", category: Basic, params: &[req("path", Str)] },
    ToolSpec { name: "read_file", category: Basic, params: &[req("path", Str)] },
    ToolSpec { name: "write_file", category: Basic, params: &[req("path", Str), req("content", Str)] },
    ToolSpec { name: "link_vtable", category: Basic, params: &[opt("table", Str), opt("dir", Str)] },
    ToolSpec { name: "relink_table", category: Basic, params: &[req("path", Str), opt("dir", Str)] },
    ToolSpec { name: "rerun_stage", category: Basic, params: &[req("stage", Str)] },
    ToolSpec { name: "enter_easy_task_mode", category: Basic, params: &[] },
    ToolSpec { name: "generate_response", category: Basic, params: &[req("text", Str)] },
];

#[derive(Debug, Clone)]
pub struct ToolRegistry {
    tools: BTreeMap<&'static str, ToolSpec>,
}

impl Default for ToolRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl ToolRegistry {
    pub fn standard() -> Self {
        Self {
            tools: TOOLS.iter().map(|t| (t.name, t.clone())).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&ToolSpec> {
        self.tools.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.tools.keys().copied()
    }

    pub fn category(&self, name: &str) -> Option<ToolCategory> {
        self.get(name).map(|t| t.category)
    }

    /// Drops a tool, e.g. to simulate a narrower deployment.
    pub fn remove(&mut self, name: &str) -> bool {
        self.tools.remove(name).is_some()
    }

    /// Checks required/unknown arguments and their JSON kinds.
    pub fn validate(&self, name: &str, args: &BTreeMap<String, Value>) -> Result<(), String> {
        let spec = self.get(name).ok_or_else(|| format!("unknown tool {name}"))?;
        for p in spec.params {
            match args.get(p.name) {
                None if p.required => return Err(format!("missing argument `{}`", p.name)),
                Some(v) if !p.kind.accepts(v) => return Err(format!("argument `{}` has the wrong type ({:?} expected)", p.name, p.kind)),
                _ => {}
            }
        }
        if let Some(k) = args.keys().find(|k| !spec.params.iter().any(|p| p.name == k.as_str())) {
            return Err(format!("unexpected argument `{k}`"));
        }
        Ok(())
    }
}
