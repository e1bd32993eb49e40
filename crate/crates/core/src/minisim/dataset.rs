//! Binary gridded time-series container (`MASD`).
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic        [u8; 4]   "MASD"
//! version      u32       1
//! nx, ny       u32, u32
//! ref_lat      f64       latitude of row 0 (degrees)
//! ref_lon      f64       longitude of column 0 (degrees)
//! d_deg        f64       grid spacing (degrees)
//! n_vars       u32
//! n_times      u32
//! flags        u32       bit 0: trailing mask block present
//! comment_len  u32
//! comment      [u8; comment_len]  UTF-8
//! var table    n_vars x ([u8; 16] name, [u8; 16] units), NUL padded
//! times        n_times x f64 (seconds, strictly increasing)
//! data         n_times x n_vars x (ny * nx) f64, row-major (y outer, x inner)
//! mask         ceil(ny * nx / 8) bytes, LSB-first, bit set = valid cell (only if flags bit 0)
//! ```
//!
//! The file length must match this arithmetic exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use byteorder::{ByteOrder, LittleEndian, WriteBytesExt};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"MASD";
pub const VERSION: u32 = 1;
const NAME_WIDTH: usize = 16;
const FLAG_MASK: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("bad magic: expected MASD, found {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported dataset version {0}")]
    VersionUnsupported(u32),
    #[error("truncated file: header implies {expected} bytes, found {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("trailing bytes: header implies {expected} bytes, found {found}")]
    TrailingBytes { expected: usize, found: usize },
    #[error("inconsistent dataset: {0}")]
    Inconsistent(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Horizontal grid geometry shared by every variable in a dataset.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridGeometry {
    pub nx: usize,
    pub ny: usize,
    pub ref_lat: f64,
    pub ref_lon: f64,
    pub d_deg: f64,
}

impl GridGeometry {
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn lat(&self, j: usize) -> f64 {
        self.ref_lat + j as f64 * self.d_deg
    }

    pub fn lon(&self, i: usize) -> f64 {
        self.ref_lon + i as f64 * self.d_deg
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VarInfo {
    pub name: String,
    pub units: String,
}

impl VarInfo {
    pub fn new(name: &str, units: &str) -> Self {
        Self {
            name: name.to_string(),
            units: units.to_string(),
        }
    }
}

/// Header-only view of a dataset.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DatasetHeader {
    pub version: u32,
    pub grid: GridGeometry,
    pub vars: Vec<VarInfo>,
    pub times: Vec<f64>,
    pub comment: String,
    pub has_mask: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridDataset {
    pub grid: GridGeometry,
    pub vars: Vec<VarInfo>,
    pub times: Vec<f64>,
    /// `data[t][v]` holds `ny * nx` values.
    pub data: Vec<Vec<Vec<f64>>>,
    pub comment: String,
    /// Optional validity mask, `true` = valid.
    pub mask: Option<Vec<bool>>,
}

impl GridDataset {
    pub fn new(grid: GridGeometry, vars: Vec<VarInfo>) -> Self {
        Self {
            grid,
            vars,
            times: Vec::new(),
            data: Vec::new(),
            comment: String::new(),
            mask: None,
        }
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn var_index(&self, name: &str) -> Result<usize, DatasetError> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| DatasetError::UnknownVariable(name.to_string()))
    }

    /// Appends one time block; `fields` must follow the variable table order.
    pub fn push_time(&mut self, time: f64, fields: Vec<Vec<f64>>) -> Result<(), DatasetError> {
        if fields.len() != self.vars.len() {
            return Err(DatasetError::Inconsistent(format!(
                "expected {} variables, got {}",
                self.vars.len(),
                fields.len()
            )));
        }
        if let Some(f) = fields.iter().find(|f| f.len() != self.grid.cells()) {
            return Err(DatasetError::Inconsistent(format!(
                "field has {} cells, grid has {}",
                f.len(),
                self.grid.cells()
            )));
        }
        if let Some(&last) = self.times.last() {
            if time <= last {
                return Err(DatasetError::Inconsistent(format!(
                    "time {time} does not follow {last}"
                )));
            }
        }
        self.times.push(time);
        self.data.push(fields);
        Ok(())
    }

    pub fn field(&self, t: usize, var: &str) -> Result<&[f64], DatasetError> {
        let v = self.var_index(var)?;
        self.data
            .get(t)
            .map(|blk| blk[v].as_slice())
            .ok_or_else(|| DatasetError::Inconsistent(format!("time index {t} out of range")))
    }

    pub fn header(&self) -> DatasetHeader {
        DatasetHeader {
            version: VERSION,
            grid: self.grid,
            vars: self.vars.clone(),
            times: self.times.clone(),
            comment: self.comment.clone(),
            has_mask: self.mask.is_some(),
        }
    }

    fn validate(&self) -> Result<(), DatasetError> {
        if self.data.len() != self.times.len() {
            return Err(DatasetError::Inconsistent("time blocks != times".into()));
        }
        for w in self.times.windows(2) {
            if w[1] <= w[0] {
                return Err(DatasetError::Inconsistent("times not strictly increasing".into()));
            }
        }
        for blk in &self.data {
            if blk.len() != self.vars.len() || blk.iter().any(|f| f.len() != self.grid.cells()) {
                return Err(DatasetError::Inconsistent("block shape mismatch".into()));
            }
        }
        for v in &self.vars {
            if v.name.len() > NAME_WIDTH || v.units.len() > NAME_WIDTH {
                return Err(DatasetError::Inconsistent(format!(
                    "variable name/units longer than {NAME_WIDTH} bytes: {}",
                    v.name
                )));
            }
        }
        if let Some(m) = &self.mask {
            if m.len() != self.grid.cells() {
                return Err(DatasetError::Inconsistent("mask length mismatch".into()));
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, DatasetError> {
        self.validate()?;
        let mut out = Vec::with_capacity(expected_len(
            self.comment.len(),
            self.vars.len(),
            self.times.len(),
            self.grid.cells(),
            self.mask.is_some(),
        ));
        let io = |e: std::io::Error| DatasetError::Io {
            path: "<memory>".into(),
            source: e,
        };
        out.write_all(MAGIC).map_err(io)?;
        out.write_u32::<LittleEndian>(VERSION).map_err(io)?;
        out.write_u32::<LittleEndian>(self.grid.nx as u32).map_err(io)?;
        out.write_u32::<LittleEndian>(self.grid.ny as u32).map_err(io)?;
        out.write_f64::<LittleEndian>(self.grid.ref_lat).map_err(io)?;
        out.write_f64::<LittleEndian>(self.grid.ref_lon).map_err(io)?;
        out.write_f64::<LittleEndian>(self.grid.d_deg).map_err(io)?;
        out.write_u32::<LittleEndian>(self.vars.len() as u32).map_err(io)?;
        out.write_u32::<LittleEndian>(self.times.len() as u32).map_err(io)?;
        let flags = if self.mask.is_some() { FLAG_MASK } else { 0 };
        out.write_u32::<LittleEndian>(flags).map_err(io)?;
        out.write_u32::<LittleEndian>(self.comment.len() as u32).map_err(io)?;
        out.extend_from_slice(self.comment.as_bytes());
        for v in &self.vars {
            out.extend_from_slice(&padded(&v.name));
            out.extend_from_slice(&padded(&v.units));
        }
        for &t in &self.times {
            out.write_f64::<LittleEndian>(t).map_err(io)?;
        }
        for blk in &self.data {
            for field in blk {
                for &x in field {
                    out.write_f64::<LittleEndian>(x).map_err(io)?;
                }
            }
        }
        if let Some(mask) = &self.mask {
            out.extend_from_slice(&pack_mask(mask));
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DatasetError> {
        let (header, mut pos) = parse_header(bytes)?;
        let cells = header.grid.cells();
        let mut data = Vec::with_capacity(header.times.len());
        for _ in 0..header.times.len() {
            let mut blk = Vec::with_capacity(header.vars.len());
            for _ in 0..header.vars.len() {
                let mut field = vec![0.0; cells];
                LittleEndian::read_f64_into(&bytes[pos..pos + 8 * cells], &mut field);
                pos += 8 * cells;
                blk.push(field);
            }
            data.push(blk);
        }
        let mask = if header.has_mask {
            Some(unpack_mask(&bytes[pos..], cells))
        } else {
            None
        };
        Ok(Self {
            grid: header.grid,
            vars: header.vars,
            times: header.times,
            data,
            comment: header.comment,
            mask,
        })
    }
}

pub fn expected_len(comment: usize, n_vars: usize, n_times: usize, cells: usize, mask: bool) -> usize {
    let fixed = 4 + 4 + 4 + 4 + 8 * 3 + 4 + 4 + 4 + 4;
    let mask_bytes = if mask { cells.div_ceil(8) } else { 0 };
    fixed + comment + n_vars * 2 * NAME_WIDTH + n_times * 8 + n_times * n_vars * cells * 8 + mask_bytes
}

fn padded(s: &str) -> [u8; NAME_WIDTH] {
    let mut buf = [0u8; NAME_WIDTH];
    buf[..s.len()].copy_from_slice(s.as_bytes());
    buf
}

fn unpad(buf: &[u8]) -> Result<String, DatasetError> {
    let end = buf.iter().position(|&b| b == 0).unwrap_or(buf.len());
    String::from_utf8(buf[..end].to_vec())
        .map_err(|_| DatasetError::Inconsistent("variable table is not UTF-8".into()))
}

fn pack_mask(mask: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; mask.len().div_ceil(8)];
    for (k, &valid) in mask.iter().enumerate() {
        if valid {
            out[k / 8] |= 1 << (k % 8);
        }
    }
    out
}

fn unpack_mask(bytes: &[u8], cells: usize) -> Vec<bool> {
    (0..cells).map(|k| bytes[k / 8] & (1 << (k % 8)) != 0).collect()
}

fn need(bytes: &[u8], upto: usize) -> Result<(), DatasetError> {
    if bytes.len() < upto {
        Err(DatasetError::TruncatedFile {
            expected: upto,
            found: bytes.len(),
        })
    } else {
        Ok(())
    }
}

/// Parses and validates the header and the overall length; returns the
/// header plus the byte offset of the first data block.
fn parse_header(bytes: &[u8]) -> Result<(DatasetHeader, usize), DatasetError> {
    need(bytes, 4)?;
    let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if &magic != MAGIC {
        return Err(DatasetError::BadMagic(magic));
    }
    need(bytes, 48)?;
    let version = LittleEndian::read_u32(&bytes[4..8]);
    if version != VERSION {
        return Err(DatasetError::VersionUnsupported(version));
    }
    let nx = LittleEndian::read_u32(&bytes[8..12]) as usize;
    let ny = LittleEndian::read_u32(&bytes[12..16]) as usize;
    let ref_lat = LittleEndian::read_f64(&bytes[16..24]);
    let ref_lon = LittleEndian::read_f64(&bytes[24..32]);
    let d_deg = LittleEndian::read_f64(&bytes[32..40]);
    let n_vars = LittleEndian::read_u32(&bytes[40..44]) as usize;
    let n_times = LittleEndian::read_u32(&bytes[44..48]) as usize;
    need(bytes, 56)?;
    let flags = LittleEndian::read_u32(&bytes[48..52]);
    let comment_len = LittleEndian::read_u32(&bytes[52..56]) as usize;
    let has_mask = flags & FLAG_MASK != 0;
    let expected = expected_len(comment_len, n_vars, n_times, nx * ny, has_mask);
    if bytes.len() < expected {
        return Err(DatasetError::TruncatedFile {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(DatasetError::TrailingBytes {
            expected,
            found: bytes.len(),
        });
    }
    let mut pos = 56;
    let comment = String::from_utf8(bytes[pos..pos + comment_len].to_vec())
        .map_err(|_| DatasetError::Inconsistent("comment is not UTF-8".into()))?;
    pos += comment_len;
    let mut vars = Vec::with_capacity(n_vars);
    for _ in 0..n_vars {
        let name = unpad(&bytes[pos..pos + NAME_WIDTH])?;
        let units = unpad(&bytes[pos + NAME_WIDTH..pos + 2 * NAME_WIDTH])?;
        vars.push(VarInfo { name, units });
        pos += 2 * NAME_WIDTH;
    }
    let mut times = vec![0.0; n_times];
    LittleEndian::read_f64_into(&bytes[pos..pos + 8 * n_times], &mut times);
    pos += 8 * n_times;
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DatasetError::Inconsistent("times not strictly increasing".into()));
    }
    let header = DatasetHeader {
        version,
        grid: GridGeometry {
            nx,
            ny,
            ref_lat,
            ref_lon,
            d_deg,
        },
        vars,
        times,
        comment,
        has_mask,
    };
    Ok((header, pos))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, DatasetError> {
    fs::read(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<GridDataset, DatasetError> {
    GridDataset::from_bytes(&read_bytes(path.as_ref())?)
}

/// Reads and validates only the header; data blocks are length-checked but not decoded.
pub fn read_header(path: impl AsRef<Path>) -> Result<DatasetHeader, DatasetError> {
    let bytes = read_bytes(path.as_ref())?;
    parse_header(&bytes).map(|(h, _)| h)
}

pub fn write_dataset(path: impl AsRef<Path>, data: &GridDataset) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let bytes = data.to_bytes()?;
    fs::write(path, bytes).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Looks up a `key=value` line in a dataset comment.
pub fn comment_attr<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    comment.lines().find_map(|line| {
        let (k, v) = line.split_once('=')?;
        (k.trim() == key).then(|| v.trim())
    })
}
