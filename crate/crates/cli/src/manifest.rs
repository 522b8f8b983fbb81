//! Trial manifest: one CSV row per recorded trial.
//!
//! Columns: `subject_id, activity_id, repeat_index, is_static, mass_kg,
//! com_file, grf_file, contact, axis_map, split`. File paths are relative to
//! the manifest's directory. `contact` is `all`, `auto` or inclusive GRF
//! sample ranges `s-e;s-e`. `axis_map` gives, for output X, Y (up) and Z,
//! the signed source axis, e.g. `+x,+z,-y`; empty means identity. `split`
//! is `a:b` in CoM samples: samples before `a` form the start phase,
//! samples from `b` on the return phase, and the rest is dropped.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::InputError;

pub const MANIFEST_HEADER: [&str; 10] = [
    "subject_id",
    "activity_id",
    "repeat_index",
    "is_static",
    "mass_kg",
    "com_file",
    "grf_file",
    "contact",
    "axis_map",
    "split",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ContactSpec {
    All,
    Auto,
    Intervals(Vec<(usize, usize)>),
}

/// Signed permutation: output axis `i` is `sign[i]·input[source[i]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisMap {
    pub source: [usize; 3],
    pub sign: [f64; 3],
}

impl AxisMap {
    pub const IDENTITY: AxisMap = AxisMap { source: [0, 1, 2], sign: [1.0; 3] };

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.sign[i] * v[self.source[i]])
    }
}

impl std::str::FromStr for AxisMap {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::IDENTITY);
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("axis map '{s}' needs three entries"));
        }
        let mut map = Self::IDENTITY;
        for (i, p) in parts.iter().enumerate() {
            let (sign, axis) = match p.as_bytes() {
                [b'+', a] => (1.0, *a),
                [b'-', a] => (-1.0, *a),
                [a] => (1.0, *a),
                _ => return Err(format!("bad axis entry '{p}'")),
            };
            map.sign[i] = sign;
            map.source[i] = match axis.to_ascii_lowercase() {
                b'x' => 0,
                b'y' => 1,
                b'z' => 2,
                _ => return Err(format!("bad axis entry '{p}'")),
            };
        }
        let mut seen = map.source;
        seen.sort_unstable();
        if seen != [0, 1, 2] {
            return Err(format!("axis map '{s}' is not a permutation"));
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// 1-based data row in the manifest file.
    pub row: usize,
    pub subject_id: String,
    pub activity_id: String,
    pub repeat_index: u32,
    pub is_static: bool,
    pub mass_kg: f64,
    pub com_file: PathBuf,
    pub grf_file: PathBuf,
    pub contact: ContactSpec,
    pub axis_map: AxisMap,
    pub split: Option<(usize, usize)>,
}

impl ManifestEntry {
    pub fn label(&self) -> String {
        format!("{}/{}/r{}", self.subject_id, self.activity_id, self.repeat_index)
    }
}

fn parse_contact(s: &str) -> Result<ContactSpec, String> {
    match s.trim() {
        "" | "all" => Ok(ContactSpec::All),
        "auto" => Ok(ContactSpec::Auto),
        list => list
            .split(';')
            .map(|r| {
                let (a, b) = r.split_once('-').ok_or_else(|| format!("contact range '{r}' is not s-e"))?;
                let a = a.trim().parse().map_err(|_| format!("bad contact start '{a}'"))?;
                let b = b.trim().parse().map_err(|_| format!("bad contact end '{b}'"))?;
                Ok((a, b))
            })
            .collect::<Result<_, _>>()
            .map(ContactSpec::Intervals),
    }
}

fn parse_split(s: &str) -> Result<Option<(usize, usize)>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    let (a, b) = s.split_once(':').ok_or_else(|| format!("split '{s}' is not a:b"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad split start '{a}'"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad split end '{b}'"))?;
    if a == 0 || a > b {
        return Err(format!("split '{s}' needs 0 < a ≤ b"));
    }
    Ok(Some((a, b)))
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" | "" => Some(false),
        _ => None,
    }
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, InputError> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| InputError::Manifest(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| InputError::Manifest(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 10];
    for (i, name) in MANIFEST_HEADER.iter().enumerate() {
        idx[i] = match col(name) {
            Some(c) => c,
            None if matches!(*name, "contact" | "axis_map" | "split") => usize::MAX,
            None => return Err(InputError::Manifest(format!("missing column '{name}'"))),
        };
    }
    let mut entries = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| InputError::Manifest(format!("row {row}: {e}")))?;
        let get = |k: usize| if idx[k] == usize::MAX { "" } else { rec.get(idx[k]).unwrap_or("") };
        let bad = |m: String| InputError::Manifest(format!("row {row}: {m}"));
        let mass_text = get(4);
        if mass_text.is_empty() {
            return Err(InputError::MissingMass { row });
        }
        let mass_kg: f64 = mass_text.parse().map_err(|_| bad(format!("bad mass '{mass_text}'")))?;
        if !(mass_kg.is_finite() && mass_kg > 0.0) {
            return Err(bad(format!("mass must be positive, got {mass_kg}")));
        }
        let subject_id = get(0).to_string();
        let activity_id = get(1).to_string();
        if subject_id.is_empty() || activity_id.is_empty() {
            return Err(bad("subject_id and activity_id are required".into()));
        }
        let repeat_index = get(2).parse().map_err(|_| bad(format!("bad repeat_index '{}'", get(2))))?;
        let is_static = parse_bool(get(3)).ok_or_else(|| bad(format!("bad is_static '{}'", get(3))))?;
        let com_file = base.join(get(5));
        let grf_file = base.join(get(6));
        for f in [&com_file, &grf_file] {
            if !f.is_file() {
                return Err(InputError::MissingFile { row, path: f.clone() });
            }
        }
        entries.push(ManifestEntry {
            row,
            subject_id,
            activity_id,
            repeat_index,
            is_static,
            mass_kg,
            com_file,
            grf_file,
            contact: parse_contact(get(7)).map_err(bad)?,
            axis_map: get(8).parse().map_err(bad)?,
            split: parse_split(get(9)).map_err(bad)?,
        });
    }
    if entries.is_empty() {
        return Err(InputError::Manifest("no trials listed".into()));
    }
    Ok(entries)
}
