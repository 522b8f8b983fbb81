//! Welch tests, Bonferroni correction, Cohen's d and t-based confidence
//! intervals.

use serde::{Deserialize, Serialize};

use crate::descriptive::{mean, sample_variance};
use crate::dist::{f_sf, t_quantile, t_two_sided_p};
use crate::error::{Error, Result};

/// Outcome of a single hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Test statistic. `None` when unbounded (a nested fit with zero
    /// residual in the full model).
    pub statistic: Option<f64>,
    /// Numerator (or only) degrees of freedom; fractional for Welch tests.
    pub df: f64,
    /// Denominator degrees of freedom for F-type statistics.
    pub df2: Option<f64>,
    pub p_value: f64,
    pub effect_size: Option<f64>,
    pub adjusted_p: Option<f64>,
    /// Set when the full model reproduces the data exactly.
    #[serde(default)]
    pub perfect_fit: bool,
}

impl TestResult {
    fn new(statistic: f64, df: f64, df2: Option<f64>, p_value: f64) -> Self {
        Self {
            statistic: Some(statistic),
            df,
            df2,
            p_value,
            effect_size: None,
            adjusted_p: None,
            perfect_fit: false,
        }
    }

    /// Whether the (adjusted, if present) p-value falls below `alpha`.
    pub fn rejects(&self, alpha: f64) -> bool {
        self.adjusted_p.unwrap_or(self.p_value) < alpha
    }
}

fn require_len(values: &[f64], min: usize, what: &str) -> Result<()> {
    if values.len() < min {
        return Err(Error::InvalidArgument(format!(
            "{what} needs at least {min} values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what}: non-finite value")));
    }
    Ok(())
}

/// Two-sided Welch t-test for a difference of means.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    require_len(a, 2, "welch t-test sample a")?;
    require_len(b, 2, "welch t-test sample b")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_variance(a) / na, sample_variance(b) / nb);
    if va == 0.0 && vb == 0.0 {
        return Err(Error::DegenerateVariance(
            "welch t-test: both samples have zero variance".into(),
        ));
    }
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(TestResult::new(t, df, None, t_two_sided_p(t, df)))
}

/// One-way Welch ANOVA (heteroscedastic F*).
pub fn welch_anova(groups: &[&[f64]]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::InvalidArgument("welch anova needs at least 2 groups".into()));
    }
    let k = groups.len() as f64;
    let mut weights = Vec::with_capacity(groups.len());
    let mut means = Vec::with_capacity(groups.len());
    for (i, g) in groups.iter().enumerate() {
        require_len(g, 2, &format!("welch anova group {i}"))?;
        let var = sample_variance(g);
        if var == 0.0 {
            return Err(Error::DegenerateVariance(format!(
                "welch anova: group {i} has zero variance"
            )));
        }
        weights.push(g.len() as f64 / var);
        means.push(mean(g));
    }
    let w_sum: f64 = weights.iter().sum();
    let grand = weights.iter().zip(&means).map(|(w, m)| w * m).sum::<f64>() / w_sum;
    let between = weights
        .iter()
        .zip(&means)
        .map(|(w, m)| w * (m - grand).powi(2))
        .sum::<f64>()
        / (k - 1.0);
    let lambda: f64 = weights
        .iter()
        .zip(groups)
        .map(|(w, g)| (1.0 - w / w_sum).powi(2) / (g.len() as f64 - 1.0))
        .sum();
    let f = between / (1.0 + 2.0 * (k - 2.0) / (k * k - 1.0) * lambda);
    let df1 = k - 1.0;
    let df2 = (k * k - 1.0) / (3.0 * lambda);
    Ok(TestResult::new(f, df1, Some(df2), f_sf(f, df1, df2)))
}

/// Bonferroni adjustment `min(1, m·p)` for a family of `m` tests.
///
/// Panics if the family is smaller than the number of p-values given.
pub fn bonferroni(p_values: &[f64], m: usize) -> Vec<f64> {
    assert!(
        m >= p_values.len(),
        "bonferroni family size {m} smaller than {} tests",
        p_values.len()
    );
    p_values.iter().map(|p| (p * m as f64).min(1.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CohensDVariant {
    /// Pooled standard deviation weighted by degrees of freedom.
    #[default]
    Pooled,
    /// Mean difference over √((s²_a + s²_b)/2).
    Unequal,
}

/// Cohen's d for `mean(a) − mean(b)`.
pub fn cohens_d(a: &[f64], b: &[f64], variant: CohensDVariant) -> Result<f64> {
    require_len(a, 2, "cohen's d sample a")?;
    require_len(b, 2, "cohen's d sample b")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_variance(a), sample_variance(b));
    let var = match variant {
        CohensDVariant::Pooled => ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0),
        CohensDVariant::Unequal => (va + vb) / 2.0,
    };
    if var == 0.0 {
        return Err(Error::DegenerateVariance("cohen's d: zero pooled variance".into()));
    }
    Ok((mean(a) - mean(b)) / var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectMagnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl EffectMagnitude {
    pub const SMALL: f64 = 0.2;
    pub const MEDIUM: f64 = 0.5;
    pub const LARGE: f64 = 0.8;

    pub fn classify(d: f64) -> Self {
        let d = d.abs();
        if d >= Self::LARGE {
            Self::Large
        } else if d >= Self::MEDIUM {
            Self::Medium
        } else if d >= Self::SMALL {
            Self::Small
        } else {
            Self::Negligible
        }
    }
}

/// t-based confidence interval for the mean at the given two-sided level.
pub fn confidence_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    require_len(values, 2, "confidence interval")?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence level {level} not in (0, 1)")));
    }
    let n = values.len() as f64;
    let m = mean(values);
    let half = t_quantile((1.0 + level) / 2.0, n - 1.0) * (sample_variance(values) / n).sqrt();
    Ok((m - half, m + half))
}
