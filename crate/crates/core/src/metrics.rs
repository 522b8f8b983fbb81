//! Per-subject prediction metrics.
//!
//! Errors are reduced hierarchically: samples within a horizon, horizons
//! within a repeat, repeats within an activity, then activities. Each level
//! takes an unweighted mean of the level below (mean-of-means), so an
//! activity with many horizons carries the same weight as a short one.
//! Means are computed with [`stable_mean`], which makes every metric
//! invariant to the order in which activities and repeats are listed.
//!
//! Static activities count toward AE and ME but are left out of the
//! direction-accuracy metrics.

use std::collections::BTreeMap;

use compred_stats::stable_mean;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::prediction::{sweep_summaries, HorizonSummary, Trial};
use crate::profiles::{HorizonSpec, ProfileKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    /// Unweighted mean at every hierarchy level.
    #[default]
    MeanOfMeans,
    /// One grand mean over every error sample (sensitivity check only).
    Pooled,
}

/// All horizons of one repeat, reduced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub repeat_index: u32,
    pub horizon_count: usize,
    /// E_h E_s e[k]
    pub mean_error: f64,
    pub max_error: f64,
    /// E_h S
    pub direction_accuracy: f64,
    pub error_sum: f64,
    pub sample_count: usize,
}

impl RepeatSummary {
    pub fn from_horizons(repeat_index: u32, horizons: &[HorizonSummary]) -> Result<Self> {
        if horizons.is_empty() {
            return Err(Error::EmptyGroup { level: "horizon" });
        }
        if horizons.iter().any(|h| h.n_samples == 0) {
            return Err(Error::EmptyGroup { level: "sample" });
        }
        let means: Vec<f64> = horizons.iter().map(HorizonSummary::mean_error).collect();
        let sums: Vec<f64> = horizons.iter().map(|h| h.error_sum).collect();
        let scores: Vec<f64> = horizons.iter().map(|h| h.direction_score as f64).collect();
        Ok(Self {
            repeat_index,
            horizon_count: horizons.len(),
            mean_error: stable_mean(&means),
            max_error: horizons.iter().map(|h| h.max_error).fold(0.0, f64::max),
            direction_accuracy: stable_mean(&scores),
            error_sum: compred_stats::stable_sum(&sums),
            sample_count: horizons.iter().map(|h| h.n_samples).sum(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityRecord {
    pub activity_id: String,
    pub is_static: bool,
    pub repeats: Vec<RepeatSummary>,
}

fn check_nonempty(activities: &[ActivityRecord]) -> Result<()> {
    if activities.is_empty() {
        return Err(Error::EmptyGroup { level: "activity" });
    }
    if activities.iter().any(|a| a.repeats.is_empty()) {
        return Err(Error::EmptyGroup { level: "repeat" });
    }
    Ok(())
}

/// AE: `E_a E_r E_h E_s e[k]` (or the pooled grand mean).
pub fn average_error(activities: &[ActivityRecord], mode: AggregationMode) -> Result<f64> {
    check_nonempty(activities)?;
    match mode {
        AggregationMode::MeanOfMeans => {
            let per_activity: Vec<f64> = activities
                .iter()
                .map(|a| stable_mean(&a.repeats.iter().map(|r| r.mean_error).collect::<Vec<_>>()))
                .collect();
            Ok(stable_mean(&per_activity))
        }
        AggregationMode::Pooled => {
            let sums: Vec<f64> = activities.iter().flat_map(|a| a.repeats.iter().map(|r| r.error_sum)).collect();
            let count: usize = activities.iter().flat_map(|a| a.repeats.iter().map(|r| r.sample_count)).sum();
            Ok(compred_stats::stable_sum(&sums) / count as f64)
        }
    }
}

/// ME: the largest e[k] anywhere.
pub fn max_error(activities: &[ActivityRecord]) -> Result<f64> {
    check_nonempty(activities)?;
    Ok(activities
        .iter()
        .flat_map(|a| a.repeats.iter().map(|r| r.max_error))
        .fold(0.0, f64::max))
}

fn dynamic(activities: &[ActivityRecord]) -> Result<Vec<&ActivityRecord>> {
    check_nonempty(activities)?;
    let dynamic: Vec<_> = activities.iter().filter(|a| !a.is_static).collect();
    if dynamic.is_empty() {
        return Err(Error::NoDynamicActivities);
    }
    Ok(dynamic)
}

/// ADA: `E_a E_r E_h S` over non-static activities.
pub fn average_direction_accuracy(activities: &[ActivityRecord]) -> Result<f64> {
    let per_activity: Vec<f64> = dynamic(activities)?
        .iter()
        .map(|a| stable_mean(&a.repeats.iter().map(|r| r.direction_accuracy).collect::<Vec<_>>()))
        .collect();
    Ok(stable_mean(&per_activity))
}

/// MDA: `min_a min_r E_h S` over non-static activities.
pub fn min_direction_accuracy(activities: &[ActivityRecord]) -> Result<f64> {
    Ok(dynamic(activities)?
        .iter()
        .flat_map(|a| a.repeats.iter().map(|r| r.direction_accuracy))
        .fold(1.0, f64::min))
}

/// The four metrics of one subject for one profile and horizon length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub subject_id: String,
    pub profile: ProfileKind,
    pub horizon_ms: u32,
    /// meters
    pub ae: f64,
    /// meters
    pub me: f64,
    /// `None` when the subject has no non-static activity.
    pub ada: Option<f64>,
    pub mda: Option<f64>,
}

impl MetricSummary {
    pub fn from_activities(
        subject_id: &str,
        profile: ProfileKind,
        horizon_ms: u32,
        activities: &[ActivityRecord],
        mode: AggregationMode,
    ) -> Result<Self> {
        let (ada, mda) = match (average_direction_accuracy(activities), min_direction_accuracy(activities)) {
            (Ok(a), Ok(m)) => (Some(a), Some(m)),
            (Err(Error::NoDynamicActivities), _) => (None, None),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        Ok(Self {
            subject_id: subject_id.to_string(),
            profile,
            horizon_ms,
            ae: average_error(activities, mode)?,
            me: max_error(activities)?,
            ada,
            mda,
        })
    }
}

/// Group repeat summaries by activity. Activities come out sorted by id and
/// repeats by index.
pub fn group_activities<'a>(
    repeats: impl IntoIterator<Item = (&'a str, bool, RepeatSummary)>,
) -> Result<Vec<ActivityRecord>> {
    let mut map: BTreeMap<&str, ActivityRecord> = BTreeMap::new();
    for (activity, is_static, summary) in repeats {
        let entry = map.entry(activity).or_insert_with(|| ActivityRecord {
            activity_id: activity.to_string(),
            is_static,
            repeats: Vec::new(),
        });
        if entry.is_static != is_static {
            return Err(invalid(format!("activity {activity} is marked both static and dynamic")));
        }
        entry.repeats.push(summary);
    }
    let mut out: Vec<ActivityRecord> = map.into_values().collect();
    for a in &mut out {
        a.repeats.sort_by_key(|r| r.repeat_index);
    }
    Ok(out)
}

/// Sweep every trial of one subject and reduce to activity records.
pub fn activity_records(trials: &[Trial], spec: &HorizonSpec, kind: ProfileKind, stride: usize) -> Result<Vec<ActivityRecord>> {
    let mut repeats = Vec::with_capacity(trials.len());
    for trial in trials {
        let horizons = sweep_summaries(trial, spec, kind, stride)?;
        repeats.push((
            trial.activity_id.as_str(),
            trial.is_static,
            RepeatSummary::from_horizons(trial.repeat_index, &horizons)?,
        ));
    }
    group_activities(repeats)
}
