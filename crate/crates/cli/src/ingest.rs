//! Trial files and their conversion to [`Trial`]s.
//!
//! CoM files hold `time_s,px,py,pz,vx,vy,vz` at the CoM rate; GRF files hold
//! `time_s,fx,fy,fz` at the force-plate rate. Axes are as recorded and are
//! mapped to the X / Y(up) / Z convention by the manifest's axis map.

use std::io::Write;
use std::path::Path;

use compred_core::dynamics::{grf_to_acceleration, CoMState};
use compred_core::prediction::Trial;
use compred_core::signal::{detect_contact, preprocess, ForceSeries};
use nalgebra::Vector3;

use crate::config::RunConfig;
use crate::error::InputError;
use crate::manifest::{AxisMap, ContactSpec, ManifestEntry};

pub const COM_HEADER: [&str; 7] = ["time_s", "px", "py", "pz", "vx", "vy", "vz"];
pub const GRF_HEADER: [&str; 4] = ["time_s", "fx", "fy", "fz"];

/// Columns of a numeric CSV, looked up by header name.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn read(path: &Path) -> Result<Self, InputError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| InputError::schema(path, e.to_string()))?;
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| InputError::schema(path, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| InputError::schema(path, format!("data row {}: {e}", i + 1)))?;
            let row = rec
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| InputError::schema(path, format!("data row {}: '{v}' is not a finite number", i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(InputError::schema(path, "no data rows"));
        }
        Ok(Self { header, rows })
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn require(&self, path: &Path, names: &[&str]) -> Result<Vec<usize>, InputError> {
        names
            .iter()
            .map(|n| self.column(n).ok_or_else(|| InputError::schema(path, format!("missing column '{n}'"))))
            .collect()
    }

    fn check_time(&self, path: &Path, period: f64) -> Result<(), InputError> {
        let t = self.require(path, &["time_s"])?[0];
        for (i, pair) in self.rows.windows(2).enumerate() {
            let step = pair[1][t] - pair[0][t];
            if step <= 0.0 {
                return Err(InputError::NonMonotoneTime { path: path.to_path_buf(), row: i + 2 });
            }
            if (step - period).abs() > 0.01 * period {
                return Err(InputError::RateMismatch { path: path.to_path_buf(), found: step, expected: period });
            }
        }
        Ok(())
    }
}

pub struct ComData {
    pub states: Vec<CoMState>,
    pub velocity_from_differences: bool,
}

pub fn read_com(path: &Path, config: &RunConfig, axes: &AxisMap) -> Result<ComData, InputError> {
    let table = Table::read(path)?;
    table.check_time(path, config.dt)?;
    let p = table.require(path, &COM_HEADER[1..4])?;
    let positions: Vec<[f64; 3]> = table.rows.iter().map(|r| axes.apply([r[p[0]], r[p[1]], r[p[2]]])).collect();
    let (velocities, fallback) = match table.require(path, &COM_HEADER[4..7]) {
        Ok(v) => (table.rows.iter().map(|r| axes.apply([r[v[0]], r[v[1]], r[v[2]]])).collect(), false),
        Err(e) if !config.velocity_fallback => return Err(e),
        Err(_) => (central_differences(&positions, config.dt).map_err(|m| InputError::schema(path, m))?, true),
    };
    let states = positions
        .iter()
        .zip(&velocities)
        .map(|(p, v)| CoMState::new(Vector3::from(*p), Vector3::from(*v)))
        .collect();
    Ok(ComData { states, velocity_from_differences: fallback })
}

/// Central differences inside, one-sided at the ends.
fn central_differences(p: &[[f64; 3]], dt: f64) -> Result<Vec<[f64; 3]>, String> {
    let n = p.len();
    if n < 2 {
        return Err("velocity fallback needs at least 2 samples".into());
    }
    Ok((0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            std::array::from_fn(|k| (p[b][k] - p[a][k]) / ((b - a) as f64 * dt))
        })
        .collect())
}

pub fn read_grf(path: &Path, config: &RunConfig, axes: &AxisMap) -> Result<Vec<Vector3<f64>>, InputError> {
    let table = Table::read(path)?;
    table.check_time(path, 1.0 / config.grf_rate_hz)?;
    let f = table.require(path, &GRF_HEADER[1..4])?;
    Ok(table
        .rows
        .iter()
        .map(|r| Vector3::from(axes.apply([r[f[0]], r[f[1]], r[f[2]]])))
        .collect())
}

/// Trials built from one manifest row, with notes on anything adjusted.
#[derive(Debug)]
pub struct LoadedTrial {
    pub trials: Vec<Trial>,
    pub notes: Vec<String>,
}

/// Read both files, run the force signal chain, convert to acceleration,
/// align lengths and apply the phase split.
pub fn load_trial(entry: &ManifestEntry, config: &RunConfig) -> Result<LoadedTrial, InputError> {
    let label = entry.label();
    let mut notes = Vec::new();
    let com = read_com(&entry.com_file, config, &entry.axis_map)?;
    if com.velocity_from_differences {
        notes.push(format!("{label}: velocity derived by central differences"));
    }
    let forces = read_grf(&entry.grf_file, config, &entry.axis_map)?;
    let mut series = ForceSeries::new(config.grf_rate_hz, forces);
    let contacts = match &entry.contact {
        ContactSpec::All => vec![(0, series.len() - 1)],
        ContactSpec::Auto => detect_contact(&series, config.contact_threshold_n, config.contact_hold_samples),
        ContactSpec::Intervals(v) => v.clone(),
    };
    series = series.with_contacts(contacts);
    let filter = config.filter_enabled.then_some(&config.filter);
    let factor = config.grf_factor()?;
    let processed = preprocess(&series, filter, config.zero_phase, factor)
        .map_err(|e| InputError::Manifest(format!("row {}: {e}", entry.row)))?;

    let (n_com, n_grf) = (com.states.len(), processed.len());
    if n_com.abs_diff(n_grf) > config.length_tolerance {
        return Err(InputError::LengthMismatch { trial: label, com: n_com, grf: n_grf, tolerance: config.length_tolerance });
    }
    let n = n_com.min(n_grf);
    if n_com != n_grf {
        notes.push(format!("{label}: truncated to {n} samples (CoM {n_com}, GRF {n_grf})"));
    }
    let accel = processed.samples[..n]
        .iter()
        .map(|f| grf_to_acceleration(f, entry.mass_kg, config.gravity))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| InputError::Manifest(format!("row {}: {e}", entry.row)))?;
    let whole = Trial {
        subject_id: entry.subject_id.clone(),
        activity_id: entry.activity_id.clone(),
        repeat_index: entry.repeat_index,
        is_static: entry.is_static,
        mass: entry.mass_kg,
        dt: config.dt,
        com_states: com.states[..n].to_vec(),
        accel_inputs: accel,
    };

    let trials = match entry.split {
        None => vec![whole],
        Some((a, b)) => {
            if b >= n {
                return Err(InputError::Manifest(format!("row {}: split {a}:{b} outside {n} samples", entry.row)));
            }
            let phase = |suffix: &str, range: std::ops::Range<usize>| Trial {
                activity_id: format!("{}_{suffix}", whole.activity_id),
                com_states: whole.com_states[range.clone()].to_vec(),
                accel_inputs: whole.accel_inputs[range].to_vec(),
                ..whole.clone()
            };
            notes.push(format!("{label}: samples {a}..{b} between phases excluded"));
            vec![phase("start", 0..a), phase("return", b..n)]
        }
    };
    Ok(LoadedTrial { trials, notes })
}

pub fn write_com(path: &Path, states: &[CoMState], dt: f64) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{}", COM_HEADER.join(","))?;
    for (k, s) in states.iter().enumerate() {
        let (p, v) = (s.position, s.velocity);
        writeln!(w, "{},{},{},{},{},{},{}", k as f64 * dt, p.x, p.y, p.z, v.x, v.y, v.z)?;
    }
    w.flush()
}

pub fn write_grf(path: &Path, forces: &[Vector3<f64>], rate_hz: f64) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{}", GRF_HEADER.join(","))?;
    for (k, f) in forces.iter().enumerate() {
        writeln!(w, "{},{},{},{}", k as f64 / rate_hz, f.x, f.y, f.z)?;
    }
    w.flush()
}
