//! Student t and Fisher F distributions via the incomplete beta function.

use crate::special::beta_reg_split;

/// Student t CDF with (possibly fractional) `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    let tt = t * t;
    let x = df / (df + tt);
    let y = tt / (df + tt);
    let tail = 0.5 * beta_reg_split(df / 2.0, 0.5, x, y);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Two-sided p-value P(|T| ≥ |t|).
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    let tt = t * t;
    let x = df / (df + tt);
    let y = tt / (df + tt);
    beta_reg_split(df / 2.0, 0.5, x, y).clamp(0.0, 1.0)
}

/// Quantile of the t distribution, `0 < p < 1`.
///
/// Bracketed bisection on [`t_cdf`]; the CDF is monotone so this converges
/// to the last representable bit.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile level must lie in (0, 1)");
    if p == 0.5 {
        return 0.0;
    }
    let mut hi = 1.0;
    while t_cdf(hi, df) < p.max(1.0 - p) {
        hi *= 2.0;
    }
    let (mut lo, mut hi) = if p > 0.5 { (0.0, hi) } else { (-hi, 0.0) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// F distribution CDF with `(df1, df2)` degrees of freedom.
pub fn f_cdf(f: f64, df1: f64, df2: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    let denom = df1 * f + df2;
    beta_reg_split(df1 / 2.0, df2 / 2.0, df1 * f / denom, df2 / denom)
}

/// Upper-tail probability P(F ≥ f).
pub fn f_sf(f: f64, df1: f64, df2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let denom = df1 * f + df2;
    beta_reg_split(df2 / 2.0, df1 / 2.0, df2 / denom, df1 * f / denom).clamp(0.0, 1.0)
}
