//! Assumed acceleration over a prediction horizon.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::Accel3;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// No acceleration over the horizon.
    Zero,
    /// The acceleration at the first sample is held.
    Const,
    /// Minimum-jerk style decay from the first sample's acceleration to zero
    /// at the horizon end, with zero jerk at both ends.
    #[serde(rename = "cubic")]
    CubicToZero,
    /// The measured future acceleration.
    Oracle,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 4] = [Self::Zero, Self::Const, Self::CubicToZero, Self::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Const => "const",
            Self::CubicToZero => "cubic",
            Self::Oracle => "oracle",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(Self::Zero),
            "const" => Ok(Self::Const),
            "cubic" => Ok(Self::CubicToZero),
            "oracle" => Ok(Self::Oracle),
            other => Err(invalid(format!("unknown profile '{other}' (zero|const|cubic|oracle)"))),
        }
    }
}

/// Horizon length `T` in milliseconds sampled at `dt`, giving
/// `N_s = T / dt + 1` samples including the initial one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonSpec {
    pub horizon_ms: u32,
    pub dt: f64,
    pub n_samples: usize,
}

impl HorizonSpec {
    pub fn new(horizon_ms: u32, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("sample period must be positive, got {dt}")));
        }
        let steps = horizon_ms as f64 / 1000.0 / dt;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-9 * steps.max(1.0) {
            return Err(invalid(format!(
                "horizon {horizon_ms} ms is not a whole number of {dt} s samples"
            )));
        }
        let n_samples = rounded as usize + 1;
        if n_samples < 2 {
            return Err(invalid(format!("horizon {horizon_ms} ms spans fewer than 2 samples")));
        }
        Ok(Self { horizon_ms, dt, n_samples })
    }
}

/// Cubic decay weight `1 − 3s² + 2s³` at normalized horizon position `s`.
#[inline]
pub fn cubic_decay(s: f64) -> f64 {
    1.0 - s * s * (3.0 - 2.0 * s)
}

/// The assumed acceleration `u_h[k]` for `k = 1..=N_s`.
///
/// `measured_future` must hold exactly `N_s` samples for
/// [`ProfileKind::Oracle`] and is ignored otherwise. Propagation consumes the
/// first `N_s − 1` entries; the last is kept so the profile covers the whole
/// horizon.
pub fn generate_profile(
    kind: ProfileKind,
    u1: &Accel3,
    spec: &HorizonSpec,
    measured_future: Option<&[Accel3]>,
) -> Result<Vec<Accel3>> {
    if !u1.is_finite() {
        return Err(invalid("initial acceleration is not finite"));
    }
    let n = spec.n_samples;
    match kind {
        ProfileKind::Zero => Ok(vec![Accel3::zero(); n]),
        ProfileKind::Const => Ok(vec![*u1; n]),
        ProfileKind::CubicToZero => {
            let last = (n - 1) as f64;
            Ok((0..n).map(|i| u1.scaled(cubic_decay(i as f64 / last))).collect())
        }
        ProfileKind::Oracle => {
            let future = measured_future.ok_or_else(|| invalid("oracle profile needs the measured future acceleration"))?;
            if future.len() != n {
                return Err(invalid(format!(
                    "oracle profile needs {n} measured samples, got {}",
                    future.len()
                )));
            }
            Ok(future.to_vec())
        }
    }
}
