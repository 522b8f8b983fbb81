//! Statistics over the per-subject metrics table.
//!
//! At each horizon length a Welch ANOVA compares the profiles. When it
//! rejects, Welch t-tests follow for every pair. The pairs are Bonferroni
//! corrected in two families: pairs among non-oracle profiles, and oracle
//! versus each other profile. If the ANOVA cannot be computed (a profile
//! with zero variance across subjects), the pairwise tests still run and
//! their rows say so. For each metric and profile, polynomial trends in T are
//! fitted by WLS and the degree is chosen by the nested F-test cascade.

use std::collections::BTreeSet;

use compred_core::profiles::ProfileKind;
use compred_stats::{
    bonferroni, cohens_d, confidence_interval, mean, sample_variance, select_trend_model, welch_anova, welch_t_test,
    EffectMagnitude, LevelSamples, TestResult,
};

use crate::bundle::{FitRow, LevelRow, Metric, MetricRow, SkipRow, StatRow, TrendRow};
use crate::config::RunConfig;

pub const INSUFFICIENT_SUBJECTS: &str = "insufficient subjects for inference";

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Analysis {
    pub stats: Vec<StatRow>,
    pub fits: Vec<FitRow>,
    pub levels: Vec<LevelRow>,
    pub trend_tests: Vec<TrendRow>,
    pub skips: Vec<SkipRow>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Per-subject values of one metric for one profile and horizon, in subject
/// order. Subjects without a value (no dynamic activity) are left out.
fn values(rows: &[MetricRow], metric: Metric, profile: ProfileKind, horizon_ms: u32) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.profile == profile && r.horizon_ms == horizon_ms)
        .filter_map(|r| r.value(metric))
        .collect()
}

fn effect_name(m: EffectMagnitude) -> String {
    format!("{m:?}").to_ascii_lowercase()
}

pub fn analyze(rows: &[MetricRow], config: &RunConfig) -> Analysis {
    let mut out = Analysis::default();
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    let subjects: BTreeSet<&str> = rows.iter().map(|r| r.subject_id.as_str()).collect();
    let enough = subjects.len() >= 2;
    if !enough {
        out.skips.push(SkipRow {
            scope: "statistics".into(),
            item: "all".into(),
            reason: format!("{INSUFFICIENT_SUBJECTS} (n = {})", subjects.len()),
        });
    }
    for metric in Metric::ALL {
        for &t in &config.horizons_ms {
            levels_at(&rows, metric, t, config, &mut out);
            if enough {
                tests_at(&rows, metric, t, config, &mut out);
            }
        }
        for &profile in &config.profiles {
            trend(&rows, metric, profile, config, &mut out);
        }
    }
    out
}

fn levels_at(rows: &[MetricRow], metric: Metric, t: u32, config: &RunConfig, out: &mut Analysis) {
    for &profile in &config.profiles {
        let v = values(rows, metric, profile, t);
        if v.is_empty() {
            continue;
        }
        let (sd, ci) = if v.len() >= 2 {
            (finite(sample_variance(&v).sqrt()), confidence_interval(&v, config.ci_level).ok())
        } else {
            (None, None)
        };
        out.levels.push(LevelRow {
            metric,
            profile,
            horizon_ms: t,
            n: v.len(),
            mean: mean(&v),
            sd,
            ci_low: ci.map(|c| c.0),
            ci_high: ci.map(|c| c.1),
        });
    }
}

fn stat_row(metric: Metric, t: u32, comparison: String, test: &str) -> StatRow {
    StatRow {
        metric,
        horizon_ms: t,
        comparison,
        test: test.into(),
        statistic: None,
        df: None,
        df2: None,
        p: None,
        adjusted_p: None,
        family_m: None,
        cohens_d: None,
        effect: None,
        note: String::new(),
    }
}

fn fill(row: &mut StatRow, r: &TestResult) {
    row.statistic = r.statistic.and_then(finite);
    row.df = finite(r.df);
    row.df2 = r.df2.and_then(finite);
    row.p = Some(r.p_value);
}

fn tests_at(rows: &[MetricRow], metric: Metric, t: u32, config: &RunConfig, out: &mut Analysis) {
    let groups: Vec<(ProfileKind, Vec<f64>)> = config
        .profiles
        .iter()
        .map(|&p| (p, values(rows, metric, p, t)))
        .filter(|(_, v)| !v.is_empty())
        .collect();
    if groups.len() < 2 {
        return;
    }
    let mut omnibus = stat_row(metric, t, "all".into(), "welch_anova");
    let slices: Vec<&[f64]> = groups.iter().map(|(_, v)| v.as_slice()).collect();
    let gate = match welch_anova(&slices) {
        Ok(r) => {
            fill(&mut omnibus, &r);
            if r.rejects(config.alpha) {
                Gate::Significant
            } else {
                omnibus.note = "not significant; no pairwise tests".into();
                Gate::Closed
            }
        }
        Err(e) => {
            omnibus.note = e.to_string();
            Gate::Ungated
        }
    };
    out.stats.push(omnibus);
    if gate == Gate::Closed {
        return;
    }

    for oracle_family in [false, true] {
        let m = if oracle_family { config.bonferroni_m_oracle } else { config.bonferroni_m_base };
        let mut family = Vec::new();
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let (pa, a) = (&groups[i].0, &groups[i].1);
                let (pb, b) = (&groups[j].0, &groups[j].1);
                let has_oracle = *pa == ProfileKind::Oracle || *pb == ProfileKind::Oracle;
                if has_oracle != oracle_family {
                    continue;
                }
                let mut row = stat_row(metric, t, format!("{pa}-{pb}"), "welch_t");
                row.family_m = Some(m);
                match welch_t_test(a, b) {
                    Ok(r) => fill(&mut row, &r),
                    Err(e) => row.note = e.to_string(),
                }
                match cohens_d(a, b, config.cohens_d) {
                    Ok(d) => {
                        row.cohens_d = finite(d);
                        row.effect = Some(effect_name(EffectMagnitude::classify(d)));
                    }
                    Err(e) if row.note.is_empty() => row.note = format!("effect size: {e}"),
                    Err(_) => {}
                }
                if gate == Gate::Ungated {
                    let sep = if row.note.is_empty() { "" } else { "; " };
                    row.note = format!("{}{sep}omnibus test degenerate, pair not gated", row.note);
                }
                family.push(row);
            }
        }
        let raw: Vec<f64> = family.iter().filter_map(|r| r.p).collect();
        let mut adjusted = bonferroni(&raw, m).into_iter();
        for row in &mut family {
            if row.p.is_some() {
                row.adjusted_p = adjusted.next();
            }
        }
        out.stats.extend(family);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gate {
    Significant,
    Closed,
    Ungated,
}

fn trend(rows: &[MetricRow], metric: Metric, profile: ProfileKind, config: &RunConfig, out: &mut Analysis) {
    let levels: Vec<LevelSamples> = config
        .horizons_ms
        .iter()
        .map(|&t| LevelSamples::new(t as f64, values(rows, metric, profile, t)))
        .filter(|l| !l.values.is_empty())
        .collect();
    let item = format!("{}/{profile}", metric.name());
    if levels.len() < 3 {
        out.skips.push(SkipRow {
            scope: "trend".into(),
            item,
            reason: format!("{} horizon levels with data; need at least 3", levels.len()),
        });
        return;
    }
    let sel = match select_trend_model(&levels, config.alpha, config.zero_variance_epsilon) {
        Ok(s) => s,
        Err(e) => {
            out.skips.push(SkipRow { scope: "trend".into(), item, reason: e.to_string() });
            return;
        }
    };
    for fit in [Some(&sel.linear), Some(&sel.quadratic), sel.cubic.as_ref()].into_iter().flatten() {
        out.fits.push(FitRow {
            metric,
            profile,
            degree: fit.degree,
            coefficients: fit.coefficients.clone(),
            r_squared: fit.r_squared,
            weighted_rss: fit.weighted_rss,
            selected: fit.degree == sel.selected_degree,
            zero_variance_fallback: fit.zero_variance_fallback,
        });
    }
    for (name, test) in [("cubic_vs_quadratic", &sel.cubic_vs_quadratic), ("quadratic_vs_linear", &sel.quadratic_vs_linear)] {
        if let Some(r) = test {
            out.trend_tests.push(TrendRow {
                metric,
                profile,
                comparison: name.into(),
                statistic: r.statistic.and_then(finite),
                df1: r.df,
                df2: r.df2,
                p: r.p_value,
                perfect_fit: r.perfect_fit,
                selected_degree: sel.selected_degree,
            });
        }
    }
}
