//! Raw input fields (`<prefix>.NNN`) and the variable table (`Vtable`).
//!
//! Input file layout: 16-byte header `{magic "MINP", levels: u32, nx: u32, ny: u32}`
//! followed by `nx * ny` little-endian f64 values, row-major.
//!
//! Vtable: one `NNN NAME UNITS` line per input index, `#` starts a comment.

use std::fs;
use std::path::{Path, PathBuf};

use byteorder::{ByteOrder, LittleEndian};

use super::SimError;

pub const INPUT_MAGIC: &[u8; 4] = b"MINP";
pub const VTABLE_NAME: &str = "Vtable";

#[derive(Debug, Clone, PartialEq)]
pub struct InputField {
    pub levels: u32,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl InputField {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; 16 + 8 * self.values.len()];
        out[..4].copy_from_slice(INPUT_MAGIC);
        LittleEndian::write_u32(&mut out[4..8], self.levels);
        LittleEndian::write_u32(&mut out[8..12], self.nx as u32);
        LittleEndian::write_u32(&mut out[12..16], self.ny as u32);
        LittleEndian::write_f64_into(&self.values, &mut out[16..]);
        out
    }

    pub fn from_bytes(bytes: &[u8], origin: &str) -> Result<Self, SimError> {
        let bad = |m: &str| SimError::Parse(format!("{origin}: {m}"));
        if bytes.len() < 16 {
            return Err(bad("shorter than 16-byte header"));
        }
        if &bytes[..4] != INPUT_MAGIC {
            return Err(bad("bad magic, expected MINP"));
        }
        let levels = LittleEndian::read_u32(&bytes[4..8]);
        let nx = LittleEndian::read_u32(&bytes[8..12]) as usize;
        let ny = LittleEndian::read_u32(&bytes[12..16]) as usize;
        if bytes.len() != 16 + 8 * nx * ny {
            return Err(bad("length does not match header"));
        }
        let mut values = vec![0.0; nx * ny];
        LittleEndian::read_f64_into(&bytes[16..], &mut values);
        Ok(Self {
            levels,
            nx,
            ny,
            values,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VtableEntry {
    pub index: u32,
    pub name: String,
    pub units: String,
}

pub fn parse_vtable(text: &str) -> Result<Vec<VtableEntry>, SimError> {
    let mut out: Vec<VtableEntry> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [idx, name, units] = parts[..] else {
            return Err(SimError::Parse(format!(
                "Vtable line {}: expected `NNN NAME UNITS`",
                n + 1
            )));
        };
        let index = idx
            .parse::<u32>()
            .map_err(|_| SimError::Parse(format!("Vtable line {}: bad index `{idx}`", n + 1)))?;
        if out.iter().any(|e| e.index == index) {
            return Err(SimError::Parse(format!("Vtable line {}: duplicate index {index}", n + 1)));
        }
        out.push(VtableEntry {
            index,
            name: name.to_string(),
            units: units.to_string(),
        });
    }
    Ok(out)
}

/// Returns `(index, path)` for every `<prefix>.NNN` file in `dir`, sorted by index.
pub fn scan_inputs(dir: &Path, prefix: &str) -> Result<Vec<(u32, PathBuf)>, SimError> {
    let mut found = Vec::new();
    for entry in read_dir_sorted(dir)? {
        if let Some((p, idx)) = split_input_name(&entry) {
            if p == prefix {
                found.push((idx, dir.join(&entry)));
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Distinct prefixes of `<prefix>.NNN` files present in `dir`.
pub fn discover_prefixes(dir: &Path) -> Result<Vec<String>, SimError> {
    let mut prefixes: Vec<String> = read_dir_sorted(dir)?
        .iter()
        .filter_map(|n| split_input_name(n).map(|(p, _)| p.to_string()))
        .collect();
    prefixes.dedup();
    Ok(prefixes)
}

fn split_input_name(name: &str) -> Option<(&str, u32)> {
    let (prefix, digits) = name.rsplit_once('.')?;
    if prefix.is_empty() || digits.len() != 3 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((prefix, digits.parse().ok()?))
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<String>, SimError> {
    let rd = fs::read_dir(dir).map_err(|e| SimError::io(dir, e))?;
    let mut names: Vec<String> = rd
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort();
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vtable_parsing() {
        let t = "# idx name units\n000 SKINTEMP K\n001 SMOIS 1\n";
        let v = parse_vtable(t).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].name, "SMOIS");
        assert!(parse_vtable("000 A\n").is_err());
        assert!(parse_vtable("000 A K\n000 B K\n").is_err());
    }

    #[test]
    fn input_field_roundtrip_and_magic() {
        let f = InputField {
            levels: 34,
            nx: 2,
            ny: 2,
            values: vec![1.0, 2.0, 3.0, 4.0],
        };
        let b = f.to_bytes();
        assert_eq!(b.len(), 16 + 32);
        assert_eq!(InputField::from_bytes(&b, "x").unwrap(), f);
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(InputField::from_bytes(&bad, "x").is_err());
        assert!(InputField::from_bytes(&b[..40], "x").is_err());
    }

    #[test]
    fn input_names() {
        assert_eq!(split_input_name("GRIBFILE.002"), Some(("GRIBFILE", 2)));
        assert_eq!(split_input_name("GRIBFILE.02"), None);
        assert_eq!(split_input_name("Vtable"), None);
        assert_eq!(split_input_name("a.b.010"), Some(("a.b", 10)));
    }
}
