//! Weighted least-squares polynomial trends of a metric against horizon
//! length, and the nested-model F-tests used to pick the polynomial degree.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::descriptive::sample_variance;
use crate::dist::f_sf;
use crate::error::{Error, Result};
use crate::hypothesis::TestResult;

/// Per-subject metric values observed at one horizon length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSamples {
    pub horizon_ms: f64,
    pub values: Vec<f64>,
}

impl LevelSamples {
    pub fn new(horizon_ms: f64, values: Vec<f64>) -> Self {
        Self { horizon_ms, values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub degree: usize,
    /// Polynomial coefficients in horizon milliseconds, lowest order first.
    pub coefficients: Vec<f64>,
    /// Weighted R² about the weighted mean.
    pub r_squared: f64,
    /// `(horizon_ms, weight)` for every level, weight = 1 / s² of the level.
    pub level_weights: Vec<(f64, f64)>,
    pub weighted_rss: f64,
    pub weighted_tss: f64,
    pub n_obs: usize,
    /// At least one level had zero (or undefined) variance and was given
    /// weight 1/ε.
    pub zero_variance_fallback: bool,
}

impl FitResult {
    pub fn n_params(&self) -> usize {
        self.coefficients.len()
    }

    pub fn evaluate(&self, horizon_ms: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * horizon_ms + c)
    }
}

/// Fit `y = Σ c_j T^j` by weighted least squares with per-level weights
/// `1 / s²_T`. Levels whose variance is zero or undefined get `1 / epsilon`.
pub fn wls_polyfit(levels: &[LevelSamples], degree: usize, epsilon: f64) -> Result<FitResult> {
    let mut distinct: Vec<f64> = levels.iter().map(|l| l.horizon_ms).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() != levels.len() {
        return Err(Error::InvalidArgument("duplicate horizon levels in fit".into()));
    }
    if degree >= levels.len() {
        return Err(Error::InvalidArgument(format!(
            "degree {degree} needs more than {degree} levels, got {}",
            levels.len()
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("zero-variance epsilon must be positive".into()));
    }
    let mut fallback = false;
    let mut level_weights = Vec::with_capacity(levels.len());
    for level in levels {
        if level.values.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no values at horizon {} ms",
                level.horizon_ms
            )));
        }
        if level.values.iter().any(|v| !v.is_finite()) || !level.horizon_ms.is_finite() {
            return Err(Error::InvalidArgument("non-finite value in fit".into()));
        }
        let var = sample_variance(&level.values);
        let w = if var.is_finite() && var > 0.0 {
            1.0 / var
        } else {
            fallback = true;
            1.0 / epsilon
        };
        level_weights.push((level.horizon_ms, w));
    }

    let scale = levels.iter().map(|l| l.horizon_ms.abs()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let n_obs: usize = levels.iter().map(|l| l.values.len()).sum();
    let n_params = degree + 1;
    if n_obs < n_params {
        return Err(Error::InvalidArgument("fewer observations than parameters".into()));
    }

    // rows of sqrt(w)·[1, x, x², …] with x = T / scale
    let mut design = DMatrix::<f64>::zeros(n_obs, n_params);
    let mut rhs = DVector::<f64>::zeros(n_obs);
    let mut row = 0;
    for (level, &(_, w)) in levels.iter().zip(&level_weights) {
        let sw = w.sqrt();
        let x = level.horizon_ms / scale;
        for &y in &level.values {
            let mut xp = 1.0;
            for j in 0..n_params {
                design[(row, j)] = sw * xp;
                xp *= x;
            }
            rhs[row] = sw * y;
            row += 1;
        }
    }
    let qr = design.qr();
    let qtb = qr.q().transpose() * &rhs;
    let scaled = qr
        .r()
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::InvalidArgument("singular design matrix".into()))?;

    let mut wrss = 0.0;
    let mut w_sum = 0.0;
    let mut wy_sum = 0.0;
    for (level, &(_, w)) in levels.iter().zip(&level_weights) {
        let x = level.horizon_ms / scale;
        let fitted = scaled.iter().rev().fold(0.0, |acc, c| acc * x + c);
        for &y in &level.values {
            wrss += w * (y - fitted).powi(2);
            w_sum += w;
            wy_sum += w * y;
        }
    }
    let w_mean = wy_sum / w_sum;
    let wtss: f64 = levels
        .iter()
        .zip(&level_weights)
        .map(|(l, &(_, w))| l.values.iter().map(|y| w * (y - w_mean).powi(2)).sum::<f64>())
        .sum();
    let r_squared = if wtss > 0.0 {
        (1.0 - wrss / wtss).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let coefficients = scaled
        .iter()
        .enumerate()
        .map(|(j, c)| c / scale.powi(j as i32))
        .collect();

    Ok(FitResult {
        degree,
        coefficients,
        r_squared,
        level_weights,
        weighted_rss: wrss,
        weighted_tss: wtss,
        n_obs,
        zero_variance_fallback: fallback,
    })
}

/// Extra-sum-of-squares F-test of a reduced polynomial against a fuller one
/// fitted to the same observations with the same weights.
pub fn nested_f_test(reduced: &FitResult, full: &FitResult, n_total: usize) -> Result<TestResult> {
    let (p_r, p_f) = (reduced.n_params(), full.n_params());
    if p_f <= p_r {
        return Err(Error::InvalidArgument("full model must have more parameters".into()));
    }
    if n_total <= p_f {
        return Err(Error::InvalidArgument(format!(
            "{n_total} observations leave no residual degrees of freedom for {p_f} parameters"
        )));
    }
    if reduced.level_weights != full.level_weights || reduced.n_obs != full.n_obs {
        return Err(Error::InvalidArgument("fits were not made on the same data".into()));
    }
    let df1 = (p_f - p_r) as f64;
    let df2 = (n_total - p_f) as f64;
    let gain = reduced.weighted_rss - full.weighted_rss;
    let mut result = TestResult {
        statistic: Some(0.0),
        df: df1,
        df2: Some(df2),
        p_value: 1.0,
        effect_size: None,
        adjusted_p: None,
        perfect_fit: false,
    };
    if gain <= 0.0 {
        return Ok(result);
    }
    if full.weighted_rss == 0.0 {
        result.statistic = None;
        result.p_value = 0.0;
        result.perfect_fit = true;
        return Ok(result);
    }
    let f = (gain / df1) / (full.weighted_rss / df2);
    result.statistic = Some(f);
    result.p_value = f_sf(f, df1, df2);
    Ok(result)
}

/// Linear, quadratic and (when there are enough levels) cubic fits with the
/// degree picked by a top-down cascade: cubic vs quadratic first, and
/// quadratic vs linear only if the cubic term is not significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSelection {
    pub linear: FitResult,
    pub quadratic: FitResult,
    pub cubic: Option<FitResult>,
    pub cubic_vs_quadratic: Option<TestResult>,
    pub quadratic_vs_linear: Option<TestResult>,
    pub selected_degree: usize,
}

pub fn select_trend_model(levels: &[LevelSamples], alpha: f64, epsilon: f64) -> Result<TrendSelection> {
    let n_total: usize = levels.iter().map(|l| l.values.len()).sum();
    let linear = wls_polyfit(levels, 1, epsilon)?;
    let quadratic = wls_polyfit(levels, 2, epsilon)?;
    let (cubic, cubic_vs_quadratic) = if levels.len() > 3 && n_total > 4 {
        let cubic = wls_polyfit(levels, 3, epsilon)?;
        let test = nested_f_test(&quadratic, &cubic, n_total)?;
        (Some(cubic), Some(test))
    } else {
        (None, None)
    };
    let (selected_degree, quadratic_vs_linear) = match &cubic_vs_quadratic {
        Some(t) if t.p_value < alpha => (3, None),
        _ => {
            if n_total > 3 {
                let test = nested_f_test(&linear, &quadratic, n_total)?;
                let degree = if test.p_value < alpha { 2 } else { 1 };
                (degree, Some(test))
            } else {
                (1, None)
            }
        }
    };
    Ok(TrendSelection {
        linear,
        quadratic,
        cubic,
        cubic_vs_quadratic,
        quadratic_vs_linear,
        selected_degree,
    })
}
