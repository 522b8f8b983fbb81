/// Arithmetic mean. Returns NaN for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased (n − 1) sample variance using the two-pass formula.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}

/// Sum whose result does not depend on the order of `values`.
///
/// Values are sorted by total order and accumulated with Neumaier
/// compensation, so any permutation of the input gives the same bits.
pub fn stable_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in sorted {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Order-independent mean, see [`stable_sum`]. NaN for an empty slice.
///
/// The rounded quotient is clamped into `[min, max]` of the input, so the
/// mean of equal values is that value and never falls outside the data.
pub fn stable_mean(values: &[f64]) -> f64 {
    let m = stable_sum(values) / values.len() as f64;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_nan() || values.iter().any(|v| v.is_nan()) {
        m
    } else {
        m.clamp(lo, hi)
    }
}
