//! Horizon predictions over a recorded trial.
//!
//! Indices in this module are 0-based: a horizon starting at `start` covers
//! samples `start..start + N_s`.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{discretize, Accel3, CoMState};
use crate::error::{invalid, Error, Result};
use crate::profiles::{generate_profile, HorizonSpec, ProfileKind};

/// One recording of one repeat of one activity, on a uniform timebase.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub subject_id: String,
    pub activity_id: String,
    pub repeat_index: u32,
    pub is_static: bool,
    /// kilograms
    pub mass: f64,
    /// seconds
    pub dt: f64,
    /// Reference CoM states from the whole-body marker estimate.
    pub com_states: Vec<CoMState>,
    /// CoM acceleration from the force plates, same timebase.
    pub accel_inputs: Vec<Accel3>,
}

impl Trial {
    pub fn validate(&self) -> Result<()> {
        if self.com_states.len() != self.accel_inputs.len() {
            return Err(invalid(format!(
                "trial {}: {} states but {} accelerations",
                self.label(),
                self.com_states.len(),
                self.accel_inputs.len()
            )));
        }
        if self.com_states.len() < 2 {
            return Err(invalid(format!("trial {} has fewer than 2 samples", self.label())));
        }
        if !(self.dt > 0.0) || !(self.mass > 0.0) {
            return Err(invalid(format!("trial {}: dt and mass must be positive", self.label())));
        }
        if !self.com_states.iter().all(CoMState::is_finite) || !self.accel_inputs.iter().all(Accel3::is_finite) {
            return Err(invalid(format!("trial {} contains non-finite samples", self.label())));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.com_states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.com_states.is_empty()
    }

    /// `subject/activity/r<repeat>`
    pub fn label(&self) -> String {
        format!("{}/{}/r{}", self.subject_id, self.activity_id, self.repeat_index)
    }

    /// Number of horizon starts available at the given stride.
    pub fn horizon_count(&self, spec: &HorizonSpec, stride: usize) -> usize {
        if self.len() < spec.n_samples || stride == 0 {
            0
        } else {
            (self.len() - spec.n_samples) / stride + 1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonResult {
    pub start: usize,
    pub predicted_positions: Vec<Vector3<f64>>,
    /// e[k] = ‖p̂[k] − p[k]‖₂ in meters; the first entry is always 0.
    pub error_series: Vec<f64>,
    pub direction_score: u8,
}

/// What the metrics need from one horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonSummary {
    pub start: usize,
    pub n_samples: usize,
    pub error_sum: f64,
    pub max_error: f64,
    pub direction_score: u8,
}

impl HorizonSummary {
    /// Mean of e[k] over the horizon's samples.
    pub fn mean_error(&self) -> f64 {
        self.error_sum / self.n_samples as f64
    }
}

impl HorizonResult {
    pub fn summary(&self) -> HorizonSummary {
        HorizonSummary {
            start: self.start,
            n_samples: self.error_series.len(),
            error_sum: self.error_series.iter().sum(),
            max_error: self.error_series.iter().copied().fold(0.0, f64::max),
            direction_score: self.direction_score,
        }
    }
}

fn check_horizon(trial: &Trial, start: usize, spec: &HorizonSpec) -> Result<()> {
    if (trial.dt - spec.dt).abs() > 1e-12 * spec.dt {
        return Err(invalid(format!(
            "trial {} sampled at {} s but horizon expects {} s",
            trial.label(),
            trial.dt,
            spec.dt
        )));
    }
    if start + spec.n_samples > trial.len() {
        return Err(Error::OutOfRange { start, n_samples: spec.n_samples, len: trial.len() });
    }
    Ok(())
}

/// Predict the CoM position over one horizon from the reference state at
/// `start`, under the assumed acceleration `kind`.
pub fn predict_horizon(trial: &Trial, start: usize, spec: &HorizonSpec, kind: ProfileKind) -> Result<HorizonResult> {
    check_horizon(trial, start, spec)?;
    let n = spec.n_samples;
    let model = discretize(spec.dt)?;
    let future = &trial.accel_inputs[start..start + n];
    let profile = generate_profile(kind, &trial.accel_inputs[start], spec, Some(future))?;
    let states = model.propagate(&trial.com_states[start], &profile[..n - 1], n)?;
    let reference = &trial.com_states[start..start + n];
    let predicted_positions: Vec<Vector3<f64>> = states.iter().map(|s| s.position).collect();
    let error_series = predicted_positions
        .iter()
        .zip(reference)
        .map(|(p, r)| (p - r.position).norm())
        .collect();
    let direction_score = direction_score(trial, start, spec, &predicted_positions)?;
    Ok(HorizonResult { start, predicted_positions, error_series, direction_score })
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Axis of largest reference displacement over the horizon; exact ties go to
/// the earlier axis (X, then Y, then Z).
pub fn dominant_axis(displacement: &Vector3<f64>) -> usize {
    let mut best = 0;
    for axis in 1..3 {
        if displacement[axis].abs() > displacement[best].abs() {
            best = axis;
        }
    }
    best
}

/// 1 when the predicted end-of-horizon displacement has the same sign as the
/// reference displacement on the reference's dominant axis, else 0.
pub fn direction_score(trial: &Trial, start: usize, spec: &HorizonSpec, predicted: &[Vector3<f64>]) -> Result<u8> {
    check_horizon(trial, start, spec)?;
    let last = predicted
        .last()
        .ok_or_else(|| invalid("empty prediction"))?;
    let origin = trial.com_states[start].position;
    let reference = trial.com_states[start + spec.n_samples - 1].position - origin;
    let axis = dominant_axis(&reference);
    Ok(u8::from(sign(last[axis] - origin[axis]) == sign(reference[axis])))
}

fn starts(trial: &Trial, spec: &HorizonSpec, stride: usize) -> Result<std::iter::StepBy<std::ops::Range<usize>>> {
    if stride == 0 {
        return Err(invalid("horizon stride must be at least 1"));
    }
    if trial.len() < spec.n_samples {
        return Err(Error::TrialTooShort {
            trial: trial.label(),
            horizon_ms: spec.horizon_ms,
            len: trial.len(),
            needed: spec.n_samples,
        });
    }
    Ok((0..trial.len() - spec.n_samples + 1).step_by(stride))
}

/// Every horizon of the trial at stride 1, in start order.
pub fn sweep(trial: &Trial, spec: &HorizonSpec, kind: ProfileKind) -> Result<Vec<HorizonResult>> {
    sweep_with_stride(trial, spec, kind, 1)
}

pub fn sweep_with_stride(trial: &Trial, spec: &HorizonSpec, kind: ProfileKind, stride: usize) -> Result<Vec<HorizonResult>> {
    starts(trial, spec, stride)?
        .map(|s| predict_horizon(trial, s, spec, kind))
        .collect()
}

/// Parallel sweep; results are identical to [`sweep_with_stride`].
pub fn par_sweep(trial: &Trial, spec: &HorizonSpec, kind: ProfileKind, stride: usize) -> Result<Vec<HorizonResult>> {
    let starts: Vec<usize> = starts(trial, spec, stride)?.collect();
    starts
        .into_par_iter()
        .map(|s| predict_horizon(trial, s, spec, kind))
        .collect()
}

/// Sweep keeping only the per-horizon summaries.
pub fn sweep_summaries(trial: &Trial, spec: &HorizonSpec, kind: ProfileKind, stride: usize) -> Result<Vec<HorizonSummary>> {
    starts(trial, spec, stride)?
        .map(|s| predict_horizon(trial, s, spec, kind).map(|r| r.summary()))
        .collect()
}
