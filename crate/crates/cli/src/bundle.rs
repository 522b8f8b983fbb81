//! The result bundle and its CSV / JSON forms.

use std::fs;
use std::io::Write;
use std::path::Path;

use compred_core::profiles::ProfileKind;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const METRICS_HEADER: [&str; 7] = ["subject_id", "profile", "horizon_ms", "ae_m", "me_m", "ada", "mda"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub subject_id: String,
    pub profile: ProfileKind,
    pub horizon_ms: u32,
    pub ae_m: f64,
    pub me_m: f64,
    pub ada: Option<f64>,
    pub mda: Option<f64>,
}

impl MetricRow {
    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Ae => Some(self.ae_m),
            Metric::Me => Some(self.me_m),
            Metric::Ada => self.ada,
            Metric::Mda => self.mda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Ae,
    Me,
    Ada,
    Mda,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Ae, Metric::Me, Metric::Ada, Metric::Mda];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ae => "ae",
            Metric::Me => "me",
            Metric::Ada => "ada",
            Metric::Mda => "mda",
        }
    }
}

/// One line of the hypothesis-test table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub metric: Metric,
    pub horizon_ms: u32,
    /// `all` for the omnibus test, `a-b` for a pair.
    pub comparison: String,
    pub test: String,
    pub statistic: Option<f64>,
    pub df: Option<f64>,
    pub df2: Option<f64>,
    pub p: Option<f64>,
    pub adjusted_p: Option<f64>,
    pub family_m: Option<usize>,
    pub cohens_d: Option<f64>,
    pub effect: Option<String>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub metric: Metric,
    pub profile: ProfileKind,
    pub degree: usize,
    /// Lowest order first; T in milliseconds.
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
    pub weighted_rss: f64,
    pub selected: bool,
    pub zero_variance_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub metric: Metric,
    pub profile: ProfileKind,
    pub horizon_ms: u32,
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub metric: Metric,
    pub profile: ProfileKind,
    pub comparison: String,
    pub statistic: Option<f64>,
    pub df1: f64,
    pub df2: Option<f64>,
    pub p: f64,
    pub perfect_fit: bool,
    pub selected_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipRow {
    pub scope: String,
    pub item: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub version: String,
    pub config: RunConfig,
    pub metrics: Vec<MetricRow>,
    pub stats: Vec<StatRow>,
    pub fits: Vec<FitRow>,
    pub levels: Vec<LevelRow>,
    pub trend_tests: Vec<TrendRow>,
    pub skips: Vec<SkipRow>,
}

pub const VERSION: &str = concat!("compred ", env!("CARGO_PKG_VERSION"));

/// Shortest round-trip text; scientific notation far from unity.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn opt(x: &Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn opt_str<T: std::fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map(|v| v.to_string()).unwrap_or_default()
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricRow]) -> std::io::Result<()> {
    write_table(
        path,
        &METRICS_HEADER,
        rows.iter().map(|r| {
            vec![
                r.subject_id.clone(),
                r.profile.to_string(),
                r.horizon_ms.to_string(),
                num(r.ae_m),
                num(r.me_m),
                opt(&r.ada),
                opt(&r.mda),
            ]
        }),
    )
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricRow>, crate::error::InputError> {
    use crate::error::InputError;
    let mut reader = csv::Reader::from_path(path).map_err(|e| InputError::schema(path, e.to_string()))?;
    let header = reader.headers().map_err(|e| InputError::schema(path, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != METRICS_HEADER {
        return Err(InputError::schema(path, format!("header must be {}", METRICS_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let bad = |m: &str| InputError::schema(path, format!("data row {}: {m}", i + 1));
        let rec = rec.map_err(|e| bad(&e.to_string()))?;
        let f = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(&format!("bad number '{}'", &rec[k])));
        let o = |k: usize| if rec[k].is_empty() { Ok(None) } else { f(k).map(Some) };
        rows.push(MetricRow {
            subject_id: rec[0].to_string(),
            profile: rec[1].parse().map_err(|e: compred_core::Error| bad(&e.to_string()))?,
            horizon_ms: rec[2].parse().map_err(|_| bad("bad horizon_ms"))?,
            ae_m: f(3)?,
            me_m: f(4)?,
            ada: o(5)?,
            mda: o(6)?,
        });
    }
    Ok(rows)
}

pub const TABLE_FILES: [&str; 7] =
    ["metrics.csv", "stats.csv", "fits.csv", "levels.csv", "trend_tests.csv", "skips.csv", "bundle.json"];

pub fn write_csv_tables(bundle: &Bundle, dir: &Path) -> std::io::Result<()> {
    write_metrics_csv(&dir.join("metrics.csv"), &bundle.metrics)?;
    write_table(
        &dir.join("stats.csv"),
        &[
            "metric", "horizon_ms", "comparison", "test", "statistic", "df", "df2", "p", "adjusted_p", "family_m",
            "cohens_d", "effect", "note",
        ],
        bundle.stats.iter().map(|r| {
            vec![
                r.metric.name().into(),
                r.horizon_ms.to_string(),
                r.comparison.clone(),
                r.test.clone(),
                opt(&r.statistic),
                opt(&r.df),
                opt(&r.df2),
                opt(&r.p),
                opt(&r.adjusted_p),
                opt_str(&r.family_m),
                opt(&r.cohens_d),
                opt_str(&r.effect),
                r.note.clone(),
            ]
        }),
    )?;
    write_table(
        &dir.join("fits.csv"),
        &["metric", "profile", "degree", "c0", "c1", "c2", "c3", "r_squared", "weighted_rss", "selected", "zero_variance_fallback"],
        bundle.fits.iter().map(|r| {
            let mut row = vec![r.metric.name().into(), r.profile.to_string(), r.degree.to_string()];
            row.extend((0..4).map(|j| opt(&r.coefficients.get(j).copied())));
            row.extend([num(r.r_squared), num(r.weighted_rss), r.selected.to_string(), r.zero_variance_fallback.to_string()]);
            row
        }),
    )?;
    write_table(
        &dir.join("levels.csv"),
        &["metric", "profile", "horizon_ms", "n", "mean", "sd", "ci_low", "ci_high"],
        bundle.levels.iter().map(|r| {
            vec![
                r.metric.name().into(),
                r.profile.to_string(),
                r.horizon_ms.to_string(),
                r.n.to_string(),
                num(r.mean),
                opt(&r.sd),
                opt(&r.ci_low),
                opt(&r.ci_high),
            ]
        }),
    )?;
    write_table(
        &dir.join("trend_tests.csv"),
        &["metric", "profile", "comparison", "statistic", "df1", "df2", "p", "perfect_fit", "selected_degree"],
        bundle.trend_tests.iter().map(|r| {
            vec![
                r.metric.name().into(),
                r.profile.to_string(),
                r.comparison.clone(),
                opt(&r.statistic),
                num(r.df1),
                opt(&r.df2),
                num(r.p),
                r.perfect_fit.to_string(),
                r.selected_degree.to_string(),
            ]
        }),
    )?;
    write_skips(&dir.join("skips.csv"), &bundle.skips)
}

pub fn write_skips(path: &Path, skips: &[SkipRow]) -> std::io::Result<()> {
    write_table(path, &["scope", "item", "reason"], skips.iter().map(|s| vec![s.scope.clone(), s.item.clone(), s.reason.clone()]))
}

pub fn write_json(bundle: &Bundle, path: &Path) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, bundle)?;
    writeln!(f)?;
    f.flush()
}

pub fn read_json(path: &Path) -> Result<Bundle, crate::error::InputError> {
    let text = fs::read_to_string(path).map_err(|e| crate::error::InputError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| crate::error::InputError::schema(path, e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    /// CSV tables plus bundle.json
    #[default]
    Csv,
    /// bundle.json only
    Json,
}

pub fn export(bundle: &Bundle, dir: &Path, format: Format) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    if format == Format::Csv {
        write_csv_tables(bundle, dir)?;
    }
    write_json(bundle, &dir.join("bundle.json"))
}
