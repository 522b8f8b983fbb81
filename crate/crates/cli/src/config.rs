//! Run configuration: a flat `key = value` text file.
//!
//! Blank lines and anything after `#` are ignored. Unknown keys are errors.
//! List values are comma separated.

use std::path::Path;

use compred_core::metrics::AggregationMode;
use compred_core::profiles::{HorizonSpec, ProfileKind};
use compred_core::signal::FilterSpec;
use compred_stats::CohensDVariant;
use serde::{Deserialize, Serialize};

use crate::error::InputError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// CoM sample period, seconds.
    pub dt: f64,
    pub horizons_ms: Vec<u32>,
    pub profiles: Vec<ProfileKind>,
    pub stride: usize,
    pub filter_enabled: bool,
    pub filter: FilterSpec,
    pub zero_phase: bool,
    pub grf_rate_hz: f64,
    pub gravity: f64,
    pub aggregation: AggregationMode,
    pub alpha: f64,
    pub ci_level: f64,
    /// Bonferroni family size for the pairs among non-oracle profiles.
    pub bonferroni_m_base: usize,
    /// Bonferroni family size for oracle-versus-other pairs.
    pub bonferroni_m_oracle: usize,
    pub cohens_d: CohensDVariant,
    pub zero_variance_epsilon: f64,
    /// Largest tolerated CoM/GRF length difference, CoM samples.
    pub length_tolerance: usize,
    pub contact_threshold_n: f64,
    pub contact_hold_samples: usize,
    /// Derive velocity by central differences when the CoM file has none.
    pub velocity_fallback: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dt: 0.005,
            horizons_ms: vec![125, 250, 375, 500, 625],
            profiles: ProfileKind::ALL.to_vec(),
            stride: 1,
            filter_enabled: true,
            filter: FilterSpec::default(),
            zero_phase: true,
            grf_rate_hz: 1000.0,
            gravity: compred_core::STANDARD_GRAVITY,
            aggregation: AggregationMode::MeanOfMeans,
            alpha: 0.05,
            ci_level: 0.95,
            bonferroni_m_base: 3,
            bonferroni_m_oracle: 3,
            cohens_d: CohensDVariant::Pooled,
            zero_variance_epsilon: 1e-12,
            length_tolerance: 1,
            contact_threshold_n: 20.0,
            contact_hold_samples: 10,
            velocity_fallback: false,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool, InputError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(InputError::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, InputError> {
    v.parse()
        .map_err(|_| InputError::Config(format!("{key}: cannot parse '{v}'")))
}

pub fn parse_horizons(v: &str) -> Result<Vec<u32>, InputError> {
    v.split(',').map(|s| parse_num("horizons_ms", s.trim())).collect()
}

pub fn parse_profiles(v: &str) -> Result<Vec<ProfileKind>, InputError> {
    v.split(',')
        .map(|s| s.parse().map_err(|e: compred_core::Error| InputError::Config(e.to_string())))
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let mut c = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| InputError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            c.set(key.trim(), value.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|e| InputError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), InputError> {
        match key {
            "dt" => self.dt = parse_num(key, v)?,
            "horizons_ms" => self.horizons_ms = parse_horizons(v)?,
            "profiles" => self.profiles = parse_profiles(v)?,
            "stride" => self.stride = parse_num(key, v)?,
            "filter_enabled" => self.filter_enabled = parse_bool(key, v)?,
            "filter_order" => self.filter.order = parse_num(key, v)?,
            "filter_cutoff_hz" => self.filter.cutoff_hz = parse_num(key, v)?,
            "pad_len" => self.filter.pad_len = if v == "auto" { None } else { Some(parse_num(key, v)?) },
            "zero_phase" => self.zero_phase = parse_bool(key, v)?,
            "grf_rate_hz" => self.grf_rate_hz = parse_num(key, v)?,
            "gravity" => self.gravity = parse_num(key, v)?,
            "aggregation" => {
                self.aggregation = match v {
                    "mean_of_means" => AggregationMode::MeanOfMeans,
                    "pooled" => AggregationMode::Pooled,
                    _ => return Err(InputError::Config(format!("aggregation: expected mean_of_means or pooled, got '{v}'"))),
                }
            }
            "alpha" => self.alpha = parse_num(key, v)?,
            "ci_level" => self.ci_level = parse_num(key, v)?,
            "bonferroni_m_base" => self.bonferroni_m_base = parse_num(key, v)?,
            "bonferroni_m_oracle" => self.bonferroni_m_oracle = parse_num(key, v)?,
            "cohens_d" => {
                self.cohens_d = match v {
                    "pooled" => CohensDVariant::Pooled,
                    "unequal" => CohensDVariant::Unequal,
                    _ => return Err(InputError::Config(format!("cohens_d: expected pooled or unequal, got '{v}'"))),
                }
            }
            "zero_variance_epsilon" => self.zero_variance_epsilon = parse_num(key, v)?,
            "length_tolerance" => self.length_tolerance = parse_num(key, v)?,
            "contact_threshold_n" => self.contact_threshold_n = parse_num(key, v)?,
            "contact_hold_samples" => self.contact_hold_samples = parse_num(key, v)?,
            "velocity_fallback" => self.velocity_fallback = parse_bool(key, v)?,
            _ => return Err(InputError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), InputError> {
        let bad = |m: String| Err(InputError::Config(m));
        if self.horizons_ms.is_empty() {
            return bad("horizons_ms is empty".into());
        }
        if self.profiles.is_empty() {
            return bad("profiles is empty".into());
        }
        for &t in &self.horizons_ms {
            HorizonSpec::new(t, self.dt).map_err(|e| InputError::Config(e.to_string()))?;
        }
        let mut sorted = self.horizons_ms.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.horizons_ms.len() {
            return bad("horizons_ms has duplicates".into());
        }
        let mut profiles = self.profiles.clone();
        profiles.sort();
        profiles.dedup();
        if profiles.len() != self.profiles.len() {
            return bad("profiles has duplicates".into());
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) || !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return bad("alpha and ci_level must lie in (0, 1)".into());
        }
        if self.filter.order == 0 || !(self.filter.cutoff_hz > 0.0 && self.filter.cutoff_hz < self.grf_rate_hz / 2.0) {
            return bad("filter needs order ≥ 1 and 0 < cutoff < Nyquist".into());
        }
        if !(self.gravity.is_finite() && self.zero_variance_epsilon > 0.0) {
            return bad("gravity must be finite and zero_variance_epsilon positive".into());
        }
        let others = self.profiles.iter().filter(|p| **p != ProfileKind::Oracle).count();
        if self.bonferroni_m_base < others * others.saturating_sub(1) / 2 {
            return bad(format!("bonferroni_m_base must cover the {} non-oracle pairs", others * others.saturating_sub(1) / 2));
        }
        if self.profiles.contains(&ProfileKind::Oracle) && self.bonferroni_m_oracle < others {
            return bad(format!("bonferroni_m_oracle must cover the {others} oracle pairs"));
        }
        self.grf_factor()?;
        Ok(())
    }

    /// GRF samples per CoM sample.
    pub fn grf_factor(&self) -> Result<usize, InputError> {
        let f = self.grf_rate_hz * self.dt;
        if !(f >= 1.0 && (f - f.round()).abs() < 1e-9) {
            return Err(InputError::Config(format!(
                "grf_rate_hz · dt = {f} must be a positive whole number"
            )));
        }
        Ok(f.round() as usize)
    }

    pub fn horizon_specs(&self) -> Vec<HorizonSpec> {
        self.horizons_ms
            .iter()
            .map(|&t| HorizonSpec::new(t, self.dt).expect("validated"))
            .collect()
    }

    pub fn longest_horizon(&self) -> HorizonSpec {
        let t = *self.horizons_ms.iter().max().expect("validated");
        HorizonSpec::new(t, self.dt).expect("validated")
    }
}

#[cfg(test)]
mod unit {
    use super::*;

    #[test]
    fn defaults_match_protocol() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.grf_factor().unwrap(), 5);
        assert_eq!(c.horizon_specs().iter().map(|h| h.n_samples).collect::<Vec<_>>(), vec![26, 51, 76, 101, 126]);
    }

    #[test]
    fn parses_keys_and_comments() {
        let c = RunConfig::parse(
            "# demo\nprofiles = zero, cubic\nhorizons_ms=125,250 # short\nzero_phase = false\npad_len = 12\naggregation = pooled\n",
        )
        .unwrap();
        assert_eq!(c.profiles, vec![ProfileKind::Zero, ProfileKind::CubicToZero]);
        assert_eq!(c.horizons_ms, vec![125, 250]);
        assert!(!c.zero_phase);
        assert_eq!(c.filter.pad_len, Some(12));
        assert_eq!(c.aggregation, AggregationMode::Pooled);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("colour = red").is_err());
        assert!(RunConfig::parse("horizons_ms = 127").is_err());
        assert!(RunConfig::parse("stride = 0").is_err());
        assert!(RunConfig::parse("just words").is_err());
        assert!(RunConfig::parse("grf_rate_hz = 1100").is_err());
        assert!(RunConfig::parse("profiles = zero,zero").is_err());
    }
}
