//! Synthetic trials with known ground truth, and the closed-form error of a
//! constant acceleration discrepancy.
//!
//! Discrete references are generated by the same zero-order-hold model the
//! predictor uses, with the input on each sample interval equal to the mean
//! true acceleration over that interval. Velocity then matches the continuous
//! solution exactly at every sample and position is off by O(dt²).
//! [`Reference::Continuous`] instead integrates on a finer grid and stores the
//! instantaneous acceleration at each sample, as a force plate would.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use compred_stats::{select_trend_model, LevelSamples, TrendSelection};

use crate::dynamics::{discretize, Accel3, CoMState};
use crate::error::{invalid, Error, Result};
use crate::metrics::{activity_records, AggregationMode, MetricSummary};
use crate::prediction::Trial;
use crate::profiles::{HorizonSpec, ProfileKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// seconds; a whole number of samples
    pub duration_s: f64,
    /// m/s²
    pub accel: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticKind {
    /// True acceleration is the constant `c`, so the Zero profile misses it
    /// by exactly `c` on every horizon.
    ConstantDiscrepancy { c: [f64; 3] },
    ConstantAcceleration { a: [f64; 3] },
    /// `a(t) = A·sin(2πft + φ)` per axis. The trajectory is the particular
    /// solution `v = −A/ω·cos(ωt + φ)`, `p = −A/ω²·sin(ωt + φ)` offset by the
    /// initial state.
    Sinusoid { amplitude: [f64; 3], frequency_hz: f64, phase: f64 },
    /// Constant segments back to back; the last one is held to the end.
    PiecewiseConstant { schedule: Vec<Segment> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Reference {
    Discrete,
    Continuous { substeps: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    #[serde(flatten)]
    pub kind: SyntheticKind,
    pub duration_s: f64,
    pub dt: f64,
    pub mass: f64,
    pub initial_position: [f64; 3],
    pub initial_velocity: [f64; 3],
    /// Half-width of zero-mean uniform noise added to the stored
    /// accelerations (m/s²); the reference states stay noiseless.
    pub noise_amplitude: f64,
    pub reference: Reference,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, duration_s: f64, dt: f64) -> Self {
        Self {
            kind,
            duration_s,
            dt,
            mass: 70.0,
            initial_position: [0.0, 1.0, 0.0],
            initial_velocity: [0.0; 3],
            noise_amplitude: 0.0,
            reference: Reference::Discrete,
        }
    }

    /// `duration / dt + 1` samples.
    pub fn n_samples(&self) -> Result<usize> {
        Ok(whole_steps(self.duration_s, self.dt, "duration")? + 1)
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("sample period must be positive, got {}", self.dt)));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(invalid(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.noise_amplitude.is_finite() && self.noise_amplitude >= 0.0) {
            return Err(invalid("noise amplitude must be finite and non-negative"));
        }
        if self.n_samples()? < 2 {
            return Err(invalid("synthetic trial needs at least 2 samples"));
        }
        if let Reference::Continuous { substeps } = self.reference {
            if substeps == 0 {
                return Err(invalid("continuous reference needs at least one substep"));
            }
        }
        let finite = |v: &[f64; 3]| v.iter().all(|x| x.is_finite());
        if !finite(&self.initial_position) || !finite(&self.initial_velocity) {
            return Err(invalid("initial state must be finite"));
        }
        match &self.kind {
            SyntheticKind::ConstantDiscrepancy { c: a } | SyntheticKind::ConstantAcceleration { a } => {
                if !finite(a) {
                    return Err(invalid("acceleration must be finite"));
                }
            }
            SyntheticKind::Sinusoid { amplitude, frequency_hz, phase } => {
                if !finite(amplitude) || !phase.is_finite() || !(frequency_hz.is_finite() && *frequency_hz > 0.0) {
                    return Err(invalid("sinusoid needs finite amplitude and phase and a positive frequency"));
                }
            }
            SyntheticKind::PiecewiseConstant { schedule } => {
                if schedule.is_empty() {
                    return Err(invalid("piecewise schedule is empty"));
                }
                for (i, seg) in schedule.iter().enumerate() {
                    if !(seg.duration_s > 0.0) {
                        return Err(invalid(format!("segment {i} has non-positive duration")));
                    }
                    whole_steps(seg.duration_s, self.dt, "segment")?;
                    if !finite(&seg.accel) {
                        return Err(invalid(format!("segment {i} acceleration is not finite")));
                    }
                }
            }
        }
        Ok(())
    }
}

fn whole_steps(span: f64, dt: f64, what: &str) -> Result<usize> {
    if !(span.is_finite() && span >= 0.0) {
        return Err(invalid(format!("{what} must be finite and non-negative")));
    }
    let steps = span / dt;
    let rounded = steps.round();
    if (steps - rounded).abs() > 1e-9 * steps.max(1.0) {
        return Err(invalid(format!("{what} {span} s is not a whole number of {dt} s samples")));
    }
    Ok(rounded as usize)
}

/// Continuous-time acceleration with exact interval means.
struct Signal<'a> {
    kind: &'a SyntheticKind,
    /// segment end times, seconds
    ends: Vec<f64>,
}

impl<'a> Signal<'a> {
    fn new(kind: &'a SyntheticKind) -> Self {
        let ends = match kind {
            SyntheticKind::PiecewiseConstant { schedule } => schedule
                .iter()
                .scan(0.0, |t, s| {
                    *t += s.duration_s;
                    Some(*t)
                })
                .collect(),
            _ => Vec::new(),
        };
        Self { kind, ends }
    }

    fn at(&self, t: f64) -> Vector3<f64> {
        match self.kind {
            SyntheticKind::ConstantDiscrepancy { c: a } | SyntheticKind::ConstantAcceleration { a } => Vector3::from(*a),
            SyntheticKind::Sinusoid { amplitude, frequency_hz, phase } => {
                Vector3::from(*amplitude) * (TAU * frequency_hz * t + phase).sin()
            }
            SyntheticKind::PiecewiseConstant { schedule } => {
                let i = self.ends.partition_point(|&end| end <= t).min(schedule.len() - 1);
                Vector3::from(schedule[i].accel)
            }
        }
    }

    /// Mean of `a` over `[t0, t1]`.
    fn mean(&self, t0: f64, t1: f64) -> Vector3<f64> {
        match self.kind {
            SyntheticKind::Sinusoid { amplitude, frequency_hz, phase } => {
                let w = TAU * frequency_hz;
                let integral = ((w * t0 + phase).cos() - (w * t1 + phase).cos()) / w;
                Vector3::from(*amplitude) * (integral / (t1 - t0))
            }
            SyntheticKind::PiecewiseConstant { schedule } => {
                let mut acc = Vector3::zeros();
                let mut start = 0.0_f64;
                for (i, seg) in schedule.iter().enumerate() {
                    let end = if i + 1 == schedule.len() { f64::INFINITY } else { self.ends[i] };
                    let overlap = end.min(t1) - start.max(t0);
                    if overlap > 0.0 {
                        acc += Vector3::from(seg.accel) * overlap;
                    }
                    start = end;
                }
                acc / (t1 - t0)
            }
            _ => self.at(t0),
        }
    }

    fn initial_offset(&self) -> CoMState {
        match self.kind {
            SyntheticKind::Sinusoid { amplitude, frequency_hz, phase } => {
                let w = TAU * frequency_hz;
                let a = Vector3::from(*amplitude);
                CoMState::new(-a * (phase.sin() / (w * w)), -a * (phase.cos() / w))
            }
            _ => CoMState::default(),
        }
    }
}

/// Generate one trial. Labels default to `synthetic/synthetic/r1` and are
/// meant to be overwritten by the caller.
pub fn make_trial(spec: &SyntheticSpec, seed: u64) -> Result<Trial> {
    spec.validate()?;
    let n = spec.n_samples()?;
    let dt = spec.dt;
    let signal = Signal::new(&spec.kind);
    let offset = signal.initial_offset();
    let x0 = CoMState::new(
        Vector3::from(spec.initial_position) + offset.position,
        Vector3::from(spec.initial_velocity) + offset.velocity,
    );

    let (com_states, mut accel_inputs) = match spec.reference {
        Reference::Discrete => {
            let model = discretize(dt)?;
            let inputs: Vec<Accel3> = (0..n)
                .map(|k| Accel3(signal.mean(k as f64 * dt, (k + 1) as f64 * dt)))
                .collect();
            let states = model.propagate(&x0, &inputs[..n - 1], n)?;
            (states, inputs)
        }
        Reference::Continuous { substeps } => {
            let fine_dt = dt / substeps as f64;
            let fine = discretize(fine_dt)?;
            let mut states = Vec::with_capacity(n);
            let mut x = x0;
            states.push(x);
            for k in 0..n - 1 {
                for j in 0..substeps {
                    let t0 = k as f64 * dt + j as f64 * fine_dt;
                    x = fine.step(&x, &Accel3(signal.mean(t0, t0 + fine_dt)));
                }
                states.push(x);
            }
            let inputs = (0..n).map(|k| Accel3(signal.at(k as f64 * dt))).collect();
            (states, inputs)
        }
    };

    if spec.noise_amplitude > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = spec.noise_amplitude;
        for u in &mut accel_inputs {
            for v in u.0.iter_mut() {
                *v += rng.random_range(-h..=h);
            }
        }
    }

    let is_static = match &spec.kind {
        SyntheticKind::ConstantAcceleration { a } | SyntheticKind::ConstantDiscrepancy { c: a } => {
            a.iter().all(|v| *v == 0.0) && spec.initial_velocity.iter().all(|v| *v == 0.0)
        }
        _ => false,
    };
    let trial = Trial {
        subject_id: "synthetic".into(),
        activity_id: "synthetic".into(),
        repeat_index: 1,
        is_static,
        mass: spec.mass,
        dt,
        com_states,
        accel_inputs,
    };
    trial.validate()?;
    Ok(trial)
}

fn check_k(k: usize) {
    assert!(k >= 1, "sample index k is 1-based");
}

/// Error at sample `k` (1-based) of a horizon whose assumed acceleration
/// misses the truth by a constant `c`, in the closed form `(k² − k)/2·dt²·|c|`.
///
/// This form treats the position input gain as `dt²`. The model in
/// [`crate::dynamics`] uses the exact `dt²/2`, for which [`zoh_error`] is
/// the matching closed form.
pub fn analytic_error(k: usize, dt: f64, c: f64) -> f64 {
    check_k(k);
    let k = k as f64;
    (k * k - k) / 2.0 * dt * dt * c.abs()
}

/// Mean of [`analytic_error`] over `k = 1..=N_s`: `dt²·|c|·(N_s² − 1)/6`.
pub fn expected_ae(n_samples: usize, dt: f64, c: f64) -> f64 {
    check_k(n_samples);
    let n = n_samples as f64;
    dt * dt * c.abs() * (n * n - 1.0) / 6.0
}

/// [`analytic_error`] at `k = N_s`.
pub fn expected_me(n_samples: usize, dt: f64, c: f64) -> f64 {
    analytic_error(n_samples, dt, c)
}

/// Exact error of the zero-order-hold model at sample `k` (1-based) under a
/// constant discrepancy: `(k − 1)²/2·dt²·|c|`.
pub fn zoh_error(k: usize, dt: f64, c: f64) -> f64 {
    check_k(k);
    let j = (k - 1) as f64;
    j * j / 2.0 * dt * dt * c.abs()
}

/// Mean of [`zoh_error`] over `k = 1..=N_s`: `(N_s − 1)(2N_s − 1)/12·dt²·|c|`.
pub fn zoh_expected_ae(n_samples: usize, dt: f64, c: f64) -> f64 {
    check_k(n_samples);
    let n = n_samples as f64;
    (n - 1.0) * (2.0 * n - 1.0) / 12.0 * dt * dt * c.abs()
}

/// [`zoh_error`] at `k = N_s`.
pub fn zoh_expected_me(n_samples: usize, dt: f64, c: f64) -> f64 {
    zoh_error(n_samples, dt, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendCheckConfig {
    pub stride: usize,
    pub alpha: f64,
    pub zero_variance_epsilon: f64,
    pub aggregation: AggregationMode,
    pub min_r_squared: f64,
    pub max_quadratic_p: f64,
}

impl Default for TrendCheckConfig {
    fn default() -> Self {
        Self {
            stride: 1,
            alpha: 0.05,
            zero_variance_epsilon: 1e-12,
            aggregation: AggregationMode::MeanOfMeans,
            min_r_squared: 0.999,
            max_quadratic_p: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTrendReport {
    pub profile: ProfileKind,
    /// Per-subject AE at each horizon length.
    pub levels: Vec<LevelSamples>,
    pub trend: TrendSelection,
    pub r_squared: f64,
    pub quadratic_coefficient: f64,
    pub quadratic_vs_linear_p: Option<f64>,
    pub cubic_vs_quadratic_p: Option<f64>,
    /// Every level had zero variance, so the fit ran on fallback weights.
    pub degenerate: bool,
    pub passed: bool,
}

/// Per-subject AE at each horizon, then the degree-2 WLS fit of AE against
/// T with the nested F-test cascade.
pub fn verify_quadratic_trend(
    trials: &[Trial],
    horizons_ms: &[u32],
    profile: ProfileKind,
    config: &TrendCheckConfig,
) -> Result<QuadraticTrendReport> {
    let dt = trials.first().ok_or(Error::EmptyGroup { level: "trial" })?.dt;
    let mut by_subject: BTreeMap<&str, Vec<Trial>> = BTreeMap::new();
    for t in trials {
        by_subject.entry(t.subject_id.as_str()).or_default().push(t.clone());
    }
    let mut levels = Vec::with_capacity(horizons_ms.len());
    for &t_ms in horizons_ms {
        let spec = HorizonSpec::new(t_ms, dt)?;
        let mut values = Vec::with_capacity(by_subject.len());
        for (subject, subject_trials) in &by_subject {
            let records = activity_records(subject_trials, &spec, profile, config.stride)?;
            let m = MetricSummary::from_activities(subject, profile, t_ms, &records, config.aggregation)?;
            values.push(m.ae);
        }
        levels.push(LevelSamples::new(t_ms as f64, values));
    }
    let trend = select_trend_model(&levels, config.alpha, config.zero_variance_epsilon)?;
    let quadratic_vs_linear_p = trend.quadratic_vs_linear.as_ref().map(|t| t.p_value);
    let cubic_vs_quadratic_p = trend.cubic_vs_quadratic.as_ref().map(|t| t.p_value);
    let degenerate = levels.iter().all(|l| l.values.iter().all(|v| *v == l.values[0]));
    let r_squared = trend.quadratic.r_squared;
    let quadratic_coefficient = trend.quadratic.coefficients[2];
    let passed = !degenerate
        && r_squared >= config.min_r_squared
        && quadratic_vs_linear_p.is_some_and(|p| p < config.max_quadratic_p);
    Ok(QuadraticTrendReport {
        profile,
        levels,
        trend,
        r_squared,
        quadratic_coefficient,
        quadratic_vs_linear_p,
        cubic_vs_quadratic_p,
        degenerate,
        passed,
    })
}

/// A family of synthetic trials across subjects, activities and repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyKind {
    /// Constant discrepancy of magnitude `c` along a random horizontal
    /// direction per trial; each subject's `c` is scaled by
    /// `1 + spread·U(−1, 1)`.
    ConstantDiscrepancy { c: f64, relative_spread: f64 },
    /// Rest, then `+a` along X for a switch time drawn from
    /// `switch_s`, then `−a` to the end, with `a` drawn from `accel`.
    Reversal { accel: (f64, f64), switch_s: (f64, f64) },
    /// Random piecewise-constant motion for dynamic activities and slow
    /// low-amplitude sway for static ones.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub kind: FamilyKind,
    pub subjects: usize,
    pub activities: usize,
    /// The first `static_activities` activities are static.
    pub static_activities: usize,
    pub repeats: usize,
    pub duration_s: f64,
    pub dt: f64,
    pub noise_amplitude: f64,
    pub seed: u64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, subjects: usize, activities: usize, repeats: usize) -> Self {
        Self {
            kind,
            subjects,
            activities,
            static_activities: 0,
            repeats,
            duration_s: 3.0,
            dt: 0.005,
            noise_amplitude: 0.0,
            seed: 0,
        }
    }
}

pub fn subject_label(i: usize) -> String {
    format!("S{:02}", i + 1)
}

pub fn activity_label(i: usize) -> String {
    format!("A{:02}", i + 1)
}

fn grid(t: f64, dt: f64) -> f64 {
    (t / dt).round().max(1.0) * dt
}

/// Every trial of the family in subject, activity, repeat order. Each trial
/// draws from its own ChaCha stream, so the output does not depend on
/// evaluation order.
pub fn make_family(spec: &FamilySpec) -> Result<Vec<Trial>> {
    if spec.subjects == 0 || spec.activities == 0 || spec.repeats == 0 {
        return Err(invalid("a family needs at least one subject, activity and repeat"));
    }
    if spec.static_activities > spec.activities {
        return Err(invalid("more static activities than activities"));
    }
    let dt = spec.dt;
    let mut trials = Vec::with_capacity(spec.subjects * spec.activities * spec.repeats);
    for s in 0..spec.subjects {
        let mut subject_rng = ChaCha8Rng::seed_from_u64(spec.seed);
        subject_rng.set_stream(s as u64);
        let mass = subject_rng.random_range(55.0..95.0);
        let subject_scale = match spec.kind {
            FamilyKind::ConstantDiscrepancy { relative_spread, .. } => 1.0 + relative_spread * subject_rng.random_range(-1.0..=1.0),
            _ => 1.0,
        };
        for a in 0..spec.activities {
            let is_static = a < spec.static_activities;
            for r in 0..spec.repeats {
                let index = ((s * spec.activities + a) * spec.repeats + r) as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(1 << 32 | index);
                let heading = rng.random_range(0.0..TAU);
                let kind = match spec.kind {
                    FamilyKind::ConstantDiscrepancy { c, .. } => {
                        let c = c * subject_scale;
                        SyntheticKind::ConstantDiscrepancy { c: [c * heading.cos(), 0.0, c * heading.sin()] }
                    }
                    FamilyKind::Reversal { accel, switch_s } => {
                        let amp = rng.random_range(accel.0..=accel.1);
                        let switch = grid(rng.random_range(switch_s.0..=switch_s.1), dt);
                        let rest = grid(spec.duration_s - switch, dt);
                        SyntheticKind::PiecewiseConstant {
                            schedule: vec![
                                Segment { duration_s: switch, accel: [amp, 0.0, 0.0] },
                                Segment { duration_s: rest, accel: [-amp, 0.0, 0.0] },
                            ],
                        }
                    }
                    FamilyKind::Mixed if is_static => {
                        let sway = rng.random_range(0.02..0.1);
                        SyntheticKind::Sinusoid {
                            amplitude: [sway * heading.cos(), 0.2 * sway, sway * heading.sin()],
                            frequency_hz: rng.random_range(0.2..1.0),
                            phase: rng.random_range(0.0..TAU),
                        }
                    }
                    FamilyKind::Mixed => {
                        let mut schedule = Vec::new();
                        let mut left = spec.duration_s;
                        while left > 1e-9 {
                            let d = grid(rng.random_range(0.2..0.8_f64).min(left), dt);
                            let mag = rng.random_range(0.5..3.0);
                            let dir = rng.random_range(0.0..TAU);
                            let vertical = rng.random_range(-1.0..1.0);
                            schedule.push(Segment { duration_s: d, accel: [mag * dir.cos(), vertical, mag * dir.sin()] });
                            left -= d;
                        }
                        SyntheticKind::PiecewiseConstant { schedule }
                    }
                };
                let mut trial_spec = SyntheticSpec::new(kind, spec.duration_s, dt);
                trial_spec.mass = mass;
                trial_spec.noise_amplitude = spec.noise_amplitude;
                let mut trial = make_trial(&trial_spec, rng.random())?;
                trial.subject_id = subject_label(s);
                trial.activity_id = activity_label(a);
                trial.repeat_index = r as u32 + 1;
                trial.is_static = is_static;
                trials.push(trial);
            }
        }
    }
    Ok(trials)
}
