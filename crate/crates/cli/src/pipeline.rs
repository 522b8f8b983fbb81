//! End-to-end orchestration: manifest → trials → metrics → statistics.
//!
//! Work is spread over rayon's pool, but every collection is ordered, so the
//! bundle does not depend on the thread count.

use std::collections::BTreeMap;

use compred_core::metrics::{activity_records, MetricSummary};
use compred_core::prediction::Trial;
use compred_core::profiles::{HorizonSpec, ProfileKind};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::analyze;
use crate::bundle::{Bundle, MetricRow, SkipRow, VERSION};
use crate::config::RunConfig;
use crate::error::InputError;
use crate::ingest::load_trial;
use crate::manifest::ManifestEntry;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Core(#[from] compred_core::Error),
    #[error("no trial is long enough for the longest horizon ({0} ms)")]
    NothingToAnalyze(u32),
}

/// Trials ready for prediction plus the notes raised while loading them.
pub struct Loaded {
    pub trials: Vec<Trial>,
    pub skips: Vec<SkipRow>,
}

pub fn load_all(entries: &[ManifestEntry], config: &RunConfig) -> Result<Loaded, InputError> {
    let loaded: Vec<_> = entries.par_iter().map(|e| load_trial(e, config)).collect::<Result<_, _>>()?;
    let mut trials = Vec::new();
    let mut skips = Vec::new();
    for (entry, l) in entries.iter().zip(loaded) {
        trials.extend(l.trials);
        skips.extend(l.notes.into_iter().map(|n| SkipRow { scope: "ingest".into(), item: entry.label(), reason: n }));
    }
    Ok(Loaded { trials, skips })
}

/// Drop trials shorter than the longest horizon, reporting each one.
pub fn usable_trials(trials: Vec<Trial>, config: &RunConfig, skips: &mut Vec<SkipRow>) -> Result<Vec<Trial>, PipelineError> {
    let longest = config.longest_horizon();
    let mut kept = Vec::with_capacity(trials.len());
    for t in trials {
        t.validate()?;
        if t.len() < longest.n_samples {
            skips.push(SkipRow {
                scope: "trial".into(),
                item: t.label(),
                reason: format!(
                    "{} samples, shorter than the {} needed for T = {} ms",
                    t.len(),
                    longest.n_samples,
                    longest.horizon_ms
                ),
            });
        } else {
            kept.push(t);
        }
    }
    if kept.is_empty() {
        return Err(PipelineError::NothingToAnalyze(longest.horizon_ms));
    }
    if config.stride > 1 {
        skips.push(SkipRow {
            scope: "horizon".into(),
            item: "all trials".into(),
            reason: format!("stride {} evaluates every {}th horizon start only", config.stride, config.stride),
        });
    }
    Ok(kept)
}

fn by_subject(trials: &[Trial]) -> BTreeMap<&str, Vec<Trial>> {
    let mut map: BTreeMap<&str, Vec<Trial>> = BTreeMap::new();
    for t in trials {
        map.entry(t.subject_id.as_str()).or_default().push(t.clone());
    }
    map
}

pub fn compute_metrics(trials: &[Trial], config: &RunConfig, skips: &mut Vec<SkipRow>) -> Result<Vec<MetricRow>, PipelineError> {
    let subjects = by_subject(trials);
    let specs = &config.horizon_specs();
    let tasks: Vec<(&str, &Vec<Trial>, ProfileKind, HorizonSpec)> = subjects
        .iter()
        .flat_map(|(s, ts)| {
            config
                .profiles
                .iter()
                .flat_map(move |&p| specs.iter().map(move |h| (*s, ts, p, *h)))
        })
        .collect();
    let rows = tasks
        .par_iter()
        .map(|&(subject, ts, profile, spec)| {
            let records = activity_records(ts, &spec, profile, config.stride)?;
            let m = MetricSummary::from_activities(subject, profile, spec.horizon_ms, &records, config.aggregation)?;
            Ok(MetricRow {
                subject_id: m.subject_id,
                profile,
                horizon_ms: spec.horizon_ms,
                ae_m: m.ae,
                me_m: m.me,
                ada: m.ada,
                mda: m.mda,
            })
        })
        .collect::<Result<Vec<_>, compred_core::Error>>()?;
    for (subject, ts) in &subjects {
        if ts.iter().all(|t| t.is_static) {
            skips.push(SkipRow {
                scope: "direction".into(),
                item: subject.to_string(),
                reason: "only static activities; ADA and MDA left empty".into(),
            });
        }
    }
    Ok(rows)
}

/// Metrics and statistics for already loaded trials.
pub fn run_pipeline(config: &RunConfig, trials: Vec<Trial>, mut skips: Vec<SkipRow>) -> Result<Bundle, PipelineError> {
    let trials = usable_trials(trials, config, &mut skips)?;
    let metrics = compute_metrics(&trials, config, &mut skips)?;
    let analysis = analyze(&metrics, config);
    skips.extend(analysis.skips);
    Ok(Bundle {
        version: VERSION.into(),
        config: config.clone(),
        metrics,
        stats: analysis.stats,
        fits: analysis.fits,
        levels: analysis.levels,
        trend_tests: analysis.trend_tests,
        skips,
    })
}

/// One horizon of one trial, as written by the `predict` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonRow {
    pub subject_id: String,
    pub activity_id: String,
    pub repeat_index: u32,
    pub profile: ProfileKind,
    pub horizon_ms: u32,
    pub start: usize,
    pub n_samples: usize,
    pub mean_error_m: f64,
    pub max_error_m: f64,
    pub direction_score: u8,
}

pub fn horizon_rows(trials: &[Trial], config: &RunConfig) -> Result<Vec<HorizonRow>, PipelineError> {
    let specs = &config.horizon_specs();
    let tasks: Vec<(&Trial, ProfileKind, HorizonSpec)> = trials
        .iter()
        .flat_map(|t| config.profiles.iter().flat_map(move |&p| specs.iter().map(move |h| (t, p, *h))))
        .collect();
    let nested = tasks
        .par_iter()
        .map(|&(t, profile, spec)| {
            let hs = compred_core::prediction::sweep_summaries(t, &spec, profile, config.stride)?;
            Ok(hs
                .into_iter()
                .map(|h| HorizonRow {
                    subject_id: t.subject_id.clone(),
                    activity_id: t.activity_id.clone(),
                    repeat_index: t.repeat_index,
                    profile,
                    horizon_ms: spec.horizon_ms,
                    start: h.start,
                    n_samples: h.n_samples,
                    mean_error_m: h.mean_error(),
                    max_error_m: h.max_error,
                    direction_score: h.direction_score,
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, compred_core::Error>>()?;
    Ok(nested.into_iter().flatten().collect())
}
