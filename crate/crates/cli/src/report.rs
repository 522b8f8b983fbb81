//! Plot-ready data from a finished bundle.

use std::path::Path;

use crate::bundle::Bundle;

/// `curves.csv`: each selected fit sampled every `step_ms` over the horizon
/// range. `points.csv`: every per-subject value.
pub fn write_report(bundle: &Bundle, dir: &Path, step_ms: u32) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let lo = *bundle.config.horizons_ms.iter().min().unwrap_or(&0);
    let hi = *bundle.config.horizons_ms.iter().max().unwrap_or(&0);
    let mut curves = csv::Writer::from_path(dir.join("curves.csv"))?;
    curves.write_record(["metric", "profile", "degree", "horizon_ms", "fitted"])?;
    for fit in bundle.fits.iter().filter(|f| f.selected) {
        for t in (lo..=hi).step_by(step_ms.max(1) as usize) {
            let x = t as f64;
            let y = fit.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c);
            curves.write_record([
                fit.metric.name().to_string(),
                fit.profile.to_string(),
                fit.degree.to_string(),
                t.to_string(),
                crate::bundle::num(y),
            ])?;
        }
    }
    curves.flush()?;

    let mut points = csv::Writer::from_path(dir.join("points.csv"))?;
    points.write_record(["metric", "profile", "subject_id", "horizon_ms", "value"])?;
    for metric in crate::bundle::Metric::ALL {
        for r in &bundle.metrics {
            if let Some(v) = r.value(metric) {
                points.write_record([
                    metric.name().to_string(),
                    r.profile.to_string(),
                    r.subject_id.clone(),
                    r.horizon_ms.to_string(),
                    crate::bundle::num(v),
                ])?;
            }
        }
    }
    points.flush()
}
