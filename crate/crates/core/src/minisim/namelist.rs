//! WRF-flavoured namelist files.
//!
//! Grammar (one construct per line):
//!
//! ```text
//! ! comment              anything after `!` outside quotes is ignored
//! &section               opens a section (`domain`, `physics`, `run`)
//! key = value[,]         integer, float, or 'quoted' / "quoted" string
//! /                      closes the open section
//! ```
//!
//! Keys are case-insensitive and stored lowercase. The canonical writer emits
//! `&domain`, `&physics`, `&run` in that order with two-space indented
//! `key = value,` lines, so parse -> write is stable after the first write.

use std::fmt;
use std::path::Path;

use thiserror::Error;

pub const METERS_PER_DEGREE: f64 = 111_000.0;

const SECTION_ORDER: [&str; 3] = ["domain", "physics", "run"];

#[derive(Debug, Error, PartialEq)]
pub enum NamelistError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("key `{key}`: {msg}")]
    BadValue { key: String, msg: String },
    #[error("unknown {kind} scheme `{name}`")]
    UnknownScheme { kind: &'static str, name: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
}

impl Value {
    /// Parses a bare token the way the file reader does.
    pub fn parse(token: &str) -> Result<Value, String> {
        let t = token.trim();
        if t.is_empty() {
            return Err("empty value".into());
        }
        let quoted = |q: char| t.len() >= 2 && t.starts_with(q) && t.ends_with(q);
        if quoted('\'') || quoted('"') {
            return Ok(Value::Str(t[1..t.len() - 1].to_string()));
        }
        if let Ok(i) = t.parse::<i64>() {
            return Ok(Value::Int(i));
        }
        // Fortran-style exponents (1.0d-4) are accepted too.
        let normalized = t.replace(['d', 'D'], "e");
        match normalized.parse::<f64>() {
            Ok(f) if f.is_finite() => Ok(Value::Float(f)),
            _ => Err(format!("cannot parse `{t}`")),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            Value::Str(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            Value::Float(f) if f.fract() == 0.0 => Some(*f as i64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            // Debug gives the shortest round-tripping representation and keeps a `.0`.
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Str(s) => write!(f, "'{s}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, Value)>,
}

/// Order-preserving namelist document, suitable for in-place edits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Namelist {
    pub sections: Vec<Section>,
}

/// Section a key is filed under when it has to be inserted.
pub fn canonical_section(key: &str) -> &'static str {
    match key {
        "nx" | "ny" | "ref_lat" | "ref_lon" | "d_deg" | "e_vert" => "domain",
        "dt" | "n_steps" | "output_interval" | "prefix" | "nproc" | "qv0" | "vortex_lat"
        | "vortex_lon" | "vortex_amp" | "vortex_radius_km" => "run",
        _ => "physics",
    }
}

impl Namelist {
    pub fn parse(text: &str) -> Result<Self, NamelistError> {
        let mut doc = Namelist::default();
        let mut open: Option<Section> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| NamelistError::Parse { line: line_no, msg };
            if let Some(name) = line.strip_prefix('&') {
                if open.is_some() {
                    return Err(err("section opened before previous `/`".into()));
                }
                let name = name.trim().to_ascii_lowercase();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(err(format!("bad section name `{name}`")));
                }
                if doc.sections.iter().any(|s| s.name == name) {
                    return Err(err(format!("duplicate section `{name}`")));
                }
                open = Some(Section {
                    name,
                    entries: Vec::new(),
                });
            } else if line == "/" {
                match open.take() {
                    Some(s) => doc.sections.push(s),
                    None => return Err(err("`/` without open section".into())),
                }
            } else {
                let section = open
                    .as_mut()
                    .ok_or_else(|| err("assignment outside a section".into()))?;
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
                let key = key.trim().to_ascii_lowercase();
                if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(err(format!("bad key `{key}`")));
                }
                let value = value.trim();
                let value = value.strip_suffix(',').unwrap_or(value);
                let value = Value::parse(value).map_err(err)?;
                if section.entries.iter().any(|(k, _)| *k == key) {
                    return Err(err(format!("duplicate key `{key}`")));
                }
                section.entries.push((key, value));
            }
        }
        if let Some(s) = open {
            return Err(NamelistError::Parse {
                line: text.lines().count(),
                msg: format!("section `{}` not terminated with `/`", s.name),
            });
        }
        Ok(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NamelistError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| NamelistError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NamelistError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_string()).map_err(|e| NamelistError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.sections
            .iter()
            .flat_map(|s| s.entries.iter())
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
    }

    /// Sets `key` wherever it currently lives, or inserts it into its canonical section.
    pub fn set(&mut self, key: &str, value: Value) {
        let key = key.to_ascii_lowercase();
        for s in &mut self.sections {
            if let Some(slot) = s.entries.iter_mut().find(|(k, _)| *k == key) {
                slot.1 = value;
                return;
            }
        }
        let target = canonical_section(&key);
        if let Some(s) = self.sections.iter_mut().find(|s| s.name == target) {
            s.entries.push((key, value));
        } else {
            self.sections.push(Section {
                name: target.to_string(),
                entries: vec![(key, value)],
            });
            self.sections.sort_by_key(|s| {
                SECTION_ORDER
                    .iter()
                    .position(|n| *n == s.name)
                    .unwrap_or(SECTION_ORDER.len())
            });
        }
    }

    pub fn config(&self) -> Result<SimConfig, NamelistError> {
        SimConfig::from_namelist(self)
    }
}

impl fmt::Display for Namelist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, s) in self.sections.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            writeln!(f, "&{}", s.name)?;
            for (k, v) in &s.entries {
                writeln!(f, "  {k} = {v},")?;
            }
            writeln!(f, "/")?;
        }
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quote: Option<char> = None;
    for (i, c) in line.char_indices() {
        match (quote, c) {
            (None, '!') => return &line[..i],
            (None, '\'' | '"') => quote = Some(c),
            (Some(q), c) if c == q => quote = None,
            _ => {}
        }
    }
    line
}

/// Land-surface scheme constant set: evaporation coefficient.
fn lsm_c_evap(name: &str) -> Option<f64> {
    match name {
        "noahmp_toy" => Some(3.0e-6),
        "slab_toy" => Some(1.5e-6),
        _ => None,
    }
}

/// Boundary-layer scheme constant set: linear drag.
fn pbl_kappa_drag(name: &str) -> Option<f64> {
    match name {
        "ysu_toy" => Some(1.0e-4),
        "mynn_toy" => Some(2.0e-4),
        _ => None,
    }
}

/// Microphysics scheme constant set: convective fraction of precipitation.
fn mp_conv_frac(name: &str) -> Option<f64> {
    match name {
        "thompson_toy" => Some(0.4),
        "wsm6_toy" => Some(0.6),
        _ => None,
    }
}

/// Typed, validated view of a namelist.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimConfig {
    pub nx: usize,
    pub ny: usize,
    pub ref_lat: f64,
    pub ref_lon: f64,
    pub d_deg: f64,
    pub e_vert: u32,
    pub dt: f64,
    pub n_steps: usize,
    pub output_interval: usize,
    pub prefix: String,
    pub nproc: usize,
    pub lsm_scheme: String,
    pub mp_scheme: String,
    pub pbl_scheme: String,
    pub sst_update: bool,
    pub f_coriolis: f64,
    pub h_amb: f64,
    pub g: f64,
    pub kappa_drag: f64,
    pub q_crit: f64,
    pub tau_precip: f64,
    pub c_evap: f64,
    pub conv_frac: f64,
    pub alpha_heat: f64,
    pub tsk_ref: f64,
    pub qv0: f64,
    pub vortex_lat: f64,
    pub vortex_lon: f64,
    pub vortex_amp: f64,
    pub vortex_radius_km: f64,
}

impl SimConfig {
    pub fn from_namelist(nl: &Namelist) -> Result<Self, NamelistError> {
        let f = |key: &str| -> Result<f64, NamelistError> {
            let v = nl.get(key).ok_or_else(|| NamelistError::MissingKey(key.into()))?;
            v.as_f64().ok_or_else(|| NamelistError::BadValue {
                key: key.into(),
                msg: "expected a number".into(),
            })
        };
        let f_or = |key: &str, default: f64| -> Result<f64, NamelistError> {
            if nl.get(key).is_some() {
                f(key)
            } else {
                Ok(default)
            }
        };
        let int = |key: &str| -> Result<i64, NamelistError> {
            let v = nl.get(key).ok_or_else(|| NamelistError::MissingKey(key.into()))?;
            v.as_int().ok_or_else(|| NamelistError::BadValue {
                key: key.into(),
                msg: "expected an integer".into(),
            })
        };
        let uint = |key: &str| -> Result<usize, NamelistError> {
            let v = int(key)?;
            usize::try_from(v).map_err(|_| NamelistError::BadValue {
                key: key.into(),
                msg: "must be non-negative".into(),
            })
        };
        let s = |key: &str| -> Result<String, NamelistError> {
            let v = nl.get(key).ok_or_else(|| NamelistError::MissingKey(key.into()))?;
            v.as_str().map(str::to_string).ok_or_else(|| NamelistError::BadValue {
                key: key.into(),
                msg: "expected a quoted string".into(),
            })
        };
        let scheme_default = |key: &str, kind: &'static str, scheme: &str, lookup: fn(&str) -> Option<f64>| {
            if nl.get(key).is_some() {
                f(key)
            } else {
                lookup(scheme).ok_or_else(|| NamelistError::UnknownScheme {
                    kind,
                    name: scheme.to_string(),
                })
            }
        };

        let nx = uint("nx")?;
        let ny = uint("ny")?;
        let ref_lat = f("ref_lat")?;
        let ref_lon = f("ref_lon")?;
        let d_deg = f("d_deg")?;
        let lsm_scheme = s("lsm_scheme")?;
        let mp_scheme = s("mp_scheme")?;
        let pbl_scheme = s("pbl_scheme")?;
        let sst_update = match int("sst_update")? {
            0 => false,
            1 => true,
            other => {
                return Err(NamelistError::BadValue {
                    key: "sst_update".into(),
                    msg: format!("must be 0 or 1, got {other}"),
                })
            }
        };
        let e_vert = u32::try_from(int("e_vert")?).map_err(|_| NamelistError::BadValue {
            key: "e_vert".into(),
            msg: "must be a non-negative 32-bit integer".into(),
        })?;
        let nproc = if nl.get("nproc").is_some() { uint("nproc")? } else { 1 };
        let cfg = SimConfig {
            nx,
            ny,
            ref_lat,
            ref_lon,
            d_deg,
            e_vert,
            dt: f("dt")?,
            n_steps: uint("n_steps")?,
            output_interval: uint("output_interval")?,
            prefix: s("prefix")?,
            nproc,
            c_evap: scheme_default("c_evap", "lsm", &lsm_scheme, lsm_c_evap)?,
            kappa_drag: scheme_default("kappa_drag", "pbl", &pbl_scheme, pbl_kappa_drag)?,
            conv_frac: scheme_default("conv_frac", "mp", &mp_scheme, mp_conv_frac)?,
            lsm_scheme,
            mp_scheme,
            pbl_scheme,
            sst_update,
            f_coriolis: f("f_coriolis")?,
            h_amb: f("h_amb")?,
            g: f("g")?,
            q_crit: f("q_crit")?,
            tau_precip: f("tau_precip")?,
            alpha_heat: f("alpha_heat")?,
            tsk_ref: f("tsk_ref")?,
            qv0: f_or("qv0", 0.0)?,
            vortex_lat: f_or("vortex_lat", ref_lat + d_deg * (ny / 2) as f64)?,
            vortex_lon: f_or("vortex_lon", ref_lon + d_deg * (nx / 2) as f64)?,
            vortex_amp: f_or("vortex_amp", 0.0)?,
            vortex_radius_km: f_or("vortex_radius_km", 100.0)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dx_m(&self) -> f64 {
        self.d_deg * METERS_PER_DEGREE
    }

    pub fn cfl(&self) -> f64 {
        self.dt * (self.g * self.h_amb).sqrt() / self.dx_m()
    }

    pub fn validate(&self) -> Result<(), NamelistError> {
        let bad = |m: String| Err(NamelistError::Invalid(m));
        if self.nx < 4 || self.ny < 4 {
            return bad(format!("grid {}x{} smaller than 4x4", self.nx, self.ny));
        }
        if self.d_deg <= 0.0 || self.dt <= 0.0 || self.g <= 0.0 || self.h_amb <= 0.0 {
            return bad("d_deg, dt, g and h_amb must be positive".into());
        }
        if self.output_interval == 0 {
            return bad("output_interval must be >= 1".into());
        }
        if self.tau_precip <= 0.0 {
            return bad("tau_precip must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.conv_frac) {
            return bad(format!("conv_frac {} outside [0,1]", self.conv_frac));
        }
        if self.nproc == 0 {
            return bad("nproc must be >= 1".into());
        }
        if self.cfl() > 0.5 {
            return bad(format!("CFL number {:.4} exceeds 0.5", self.cfl()));
        }
        Ok(())
    }
}
