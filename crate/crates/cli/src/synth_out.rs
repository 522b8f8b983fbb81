//! Synthetic families written as ordinary trial files and a manifest.
//!
//! Force is `m·(u + g·ŷ)` held over each CoM interval and repeated at the
//! force-plate rate, so loading with the filter off gives back `u`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use compred_core::prediction::Trial;
use compred_core::synth::{make_family, FamilySpec};
use compred_core::VERTICAL_AXIS;
use nalgebra::Vector3;

use crate::config::RunConfig;
use crate::ingest::{write_com, write_grf};
use crate::manifest::MANIFEST_HEADER;

pub fn plate_forces(trial: &Trial, config: &RunConfig) -> Vec<Vector3<f64>> {
    let factor = config.grf_factor().expect("validated config");
    trial
        .accel_inputs
        .iter()
        .flat_map(|u| {
            let mut f = u.0 * trial.mass;
            f[VERTICAL_AXIS] += trial.mass * config.gravity;
            std::iter::repeat_n(f, factor)
        })
        .collect()
}

/// Write every trial under `dir/trials` and return the manifest path.
pub fn write_trials(dir: &Path, trials: &[Trial], config: &RunConfig) -> std::io::Result<PathBuf> {
    let trial_dir = dir.join("trials");
    fs::create_dir_all(&trial_dir)?;
    let manifest = dir.join("manifest.csv");
    let mut w = std::io::BufWriter::new(fs::File::create(&manifest)?);
    writeln!(w, "{}", MANIFEST_HEADER.join(","))?;
    for t in trials {
        let stem = format!("{}_{}_r{}", t.subject_id, t.activity_id, t.repeat_index);
        let com = format!("trials/{stem}_com.csv");
        let grf = format!("trials/{stem}_grf.csv");
        write_com(&dir.join(&com), &t.com_states, t.dt)?;
        write_grf(&dir.join(&grf), &plate_forces(t, config), config.grf_rate_hz)?;
        writeln!(
            w,
            "{},{},{},{},{},{com},{grf},all,,",
            t.subject_id, t.activity_id, t.repeat_index, t.is_static, t.mass
        )?;
    }
    w.flush()?;
    Ok(manifest)
}

pub fn write_family(dir: &Path, family: &FamilySpec, config: &RunConfig) -> anyhow::Result<PathBuf> {
    let trials = make_family(family)?;
    fs::create_dir_all(dir)?;
    let path = write_trials(dir, &trials, config)?;
    let spec = serde_json::to_string_pretty(family)?;
    fs::write(dir.join("family.json"), spec + "\n")?;
    Ok(path)
}
