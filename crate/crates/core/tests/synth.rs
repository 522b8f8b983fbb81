use std::f64::consts::TAU;

use compred_core::profiles::ProfileKind;
use compred_core::synth::{
    make_family, make_trial, verify_quadratic_trend, FamilyKind, FamilySpec, Reference, SyntheticKind, SyntheticSpec,
    TrendCheckConfig,
};

fn sinusoid(dt: f64) -> SyntheticSpec {
    let mut spec = SyntheticSpec::new(
        SyntheticKind::Sinusoid { amplitude: [1.0, 0.5, -0.8], frequency_hz: 1.5, phase: 0.0 },
        2.0,
        dt,
    );
    spec.initial_position = [0.0; 3];
    spec
}

/// Worst deviation from `v = −A/ω·cos ωt`, `p = −A/ω²·sin ωt`.
fn sinusoid_deviation(dt: f64, reference: Reference) -> (f64, f64) {
    let spec = SyntheticSpec { reference, ..sinusoid(dt) };
    let trial = make_trial(&spec, 0).unwrap();
    let w = TAU * 1.5;
    let amp = nalgebra::Vector3::new(1.0, 0.5, -0.8);
    let (mut dp, mut dv) = (0.0_f64, 0.0_f64);
    for (k, s) in trial.com_states.iter().enumerate() {
        let t = k as f64 * dt;
        dp = dp.max((s.position + amp * ((w * t).sin() / (w * w))).norm());
        dv = dv.max((s.velocity + amp * ((w * t).cos() / w)).norm());
    }
    (dp, dv)
}

#[test]
fn sinusoid_converges_at_second_order() {
    let (p1, v1) = sinusoid_deviation(0.01, Reference::Discrete);
    let (p2, v2) = sinusoid_deviation(0.005, Reference::Discrete);
    let (p3, _) = sinusoid_deviation(0.0025, Reference::Discrete);
    assert!(v1 < 1e-12 && v2 < 1e-12);
    for (coarse, fine) in [(p1, p2), (p2, p3)] {
        let rate = (coarse / fine).log2();
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
    }
    assert!(p2 < 1e-4);
}

#[test]
fn continuous_reference_is_closer_to_the_true_curve() {
    let (discrete, _) = sinusoid_deviation(0.005, Reference::Discrete);
    let (fine, _) = sinusoid_deviation(0.005, Reference::Continuous { substeps: 100 });
    assert!(fine < discrete / 1000.0, "{fine} vs {discrete}");
}

#[test]
fn same_seed_same_trial() {
    let mut spec = sinusoid(0.005);
    spec.noise_amplitude = 0.3;
    let a = make_trial(&spec, 42).unwrap();
    let b = make_trial(&spec, 42).unwrap();
    let c = make_trial(&spec, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.accel_inputs, c.accel_inputs);
    assert_eq!(a.com_states, c.com_states);
    let family = FamilySpec { seed: 9, static_activities: 1, ..FamilySpec::new(FamilyKind::Mixed, 2, 3, 2) };
    assert_eq!(make_family(&family).unwrap(), make_family(&family).unwrap());
}

#[test]
fn noise_stays_within_its_bound() {
    let mut spec = SyntheticSpec::new(SyntheticKind::ConstantAcceleration { a: [0.0; 3] }, 2.0, 0.005);
    spec.noise_amplitude = 0.05;
    let t = make_trial(&spec, 1).unwrap();
    assert!(t.accel_inputs.iter().all(|u| u.0.amax() <= 0.05));
    let mean: f64 = t.accel_inputs.iter().map(|u| u.0.x).sum::<f64>() / t.len() as f64;
    assert!(mean.abs() < 0.01);
}

#[test]
fn family_layout() {
    let family = FamilySpec { static_activities: 2, ..FamilySpec::new(FamilyKind::Mixed, 3, 5, 2) };
    let trials = make_family(&family).unwrap();
    assert_eq!(trials.len(), 30);
    assert_eq!(trials[0].label(), "S01/A01/r1");
    assert_eq!(trials[29].label(), "S03/A05/r2");
    assert_eq!(trials.iter().filter(|t| t.is_static).count(), 12);
    assert!(trials.iter().all(|t| t.len() == 601));
}

#[test]
fn quadratic_trend_on_constant_discrepancy() {
    let family = FamilySpec {
        seed: 3,
        ..FamilySpec::new(FamilyKind::ConstantDiscrepancy { c: 1.0, relative_spread: 0.02 }, 6, 2, 1)
    };
    let trials = make_family(&family).unwrap();
    let config = TrendCheckConfig { stride: 10, ..TrendCheckConfig::default() };
    let report = verify_quadratic_trend(&trials, &[125, 250, 375, 500, 625], ProfileKind::Zero, &config).unwrap();
    assert!(report.passed, "{report:?}");
    assert!(report.quadratic_coefficient > 0.0);
    assert!(report.cubic_vs_quadratic_p.unwrap() > 0.05);

    let oracle = verify_quadratic_trend(&trials, &[125, 250, 375, 500, 625], ProfileKind::Oracle, &config).unwrap();
    assert!(oracle.levels.iter().all(|l| l.values.iter().all(|v| *v <= 1e-12)));
}

#[test]
fn zero_discrepancy_trend_is_flagged_degenerate() {
    let family = FamilySpec::new(FamilyKind::ConstantDiscrepancy { c: 0.0, relative_spread: 0.0 }, 3, 1, 1);
    let trials = make_family(&family).unwrap();
    let config = TrendCheckConfig { stride: 25, ..TrendCheckConfig::default() };
    let report = verify_quadratic_trend(&trials, &[125, 250, 375, 500, 625], ProfileKind::Zero, &config).unwrap();
    assert!(report.degenerate && !report.passed);
    assert!(report.trend.quadratic.zero_variance_fallback);
    assert!(report.levels.iter().all(|l| l.values.iter().all(|v| *v == 0.0)));
}
