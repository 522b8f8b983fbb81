use compred_core::metrics::{activity_records, AggregationMode, MetricSummary};
use compred_core::prediction::{par_sweep, predict_horizon, sweep, sweep_with_stride, Trial};
use compred_core::profiles::{HorizonSpec, ProfileKind};
use compred_core::synth::{make_family, make_trial, zoh_error, FamilyKind, FamilySpec, SyntheticKind, SyntheticSpec};

const DT: f64 = 0.005;
const HORIZONS: [u32; 5] = [125, 250, 375, 500, 625];

fn discrepancy_trial(c: [f64; 3], duration_s: f64) -> Trial {
    let mut spec = SyntheticSpec::new(SyntheticKind::ConstantDiscrepancy { c }, duration_s, DT);
    spec.initial_velocity = [0.4, -0.1, 0.2];
    make_trial(&spec, 0).unwrap()
}

/// |c|·t²/2 at t = (k − 1)·dt, from plain kinematics.
fn kinematic_error(k: usize, c: f64) -> f64 {
    let t = (k - 1) as f64 * DT;
    c.abs() * t * t / 2.0
}

#[test]
fn zero_profile_error_is_the_kinematic_gap() {
    for c in [0.5, 1.0, 2.0] {
        let trial = discrepancy_trial([c * 0.6, 0.0, c * 0.8], 2.0);
        for t in HORIZONS {
            let spec = HorizonSpec::new(t, DT).unwrap();
            for h in sweep_with_stride(&trial, &spec, ProfileKind::Zero, 7).unwrap() {
                for (i, e) in h.error_series.iter().enumerate() {
                    let want = kinematic_error(i + 1, c);
                    assert!((e - want).abs() <= 1e-9 * want.max(1e-12), "c {c} T {t} start {} k {}", h.start, i + 1);
                    assert!((zoh_error(i + 1, DT, c) - want).abs() <= 1e-15);
                }
            }
        }
    }
}

#[test]
fn errors_grow_strictly_after_the_first_step() {
    let trial = discrepancy_trial([1.0, 0.0, 0.0], 1.0);
    let spec = HorizonSpec::new(625, DT).unwrap();
    for h in sweep_with_stride(&trial, &spec, ProfileKind::Zero, 13).unwrap() {
        assert_eq!(h.error_series[0], 0.0);
        for k in 2..h.error_series.len() {
            assert!(h.error_series[k] > h.error_series[k - 1]);
        }
        let me = h.error_series.iter().copied().fold(0.0, f64::max);
        assert_eq!(me, *h.error_series.last().unwrap());
    }
}

#[test]
fn profile_ordering_under_constant_truth() {
    let trial = discrepancy_trial([1.5, -0.5, 0.0], 1.0);
    let spec = HorizonSpec::new(250, DT).unwrap();
    for start in [0, 40, 150] {
        let zero = predict_horizon(&trial, start, &spec, ProfileKind::Zero).unwrap();
        let cons = predict_horizon(&trial, start, &spec, ProfileKind::Const).unwrap();
        let cubic = predict_horizon(&trial, start, &spec, ProfileKind::CubicToZero).unwrap();
        assert!(cons.error_series.iter().all(|e| *e <= 1e-12));
        for k in 2..spec.n_samples {
            assert!(cubic.error_series[k] > cons.error_series[k]);
            assert!(cubic.error_series[k] < zero.error_series[k]);
        }
    }
}

#[test]
fn oracle_is_exact_on_model_consistent_data() {
    let family = FamilySpec { seed: 11, ..FamilySpec::new(FamilyKind::Mixed, 2, 3, 2) };
    for trial in make_family(&family).unwrap() {
        for t in HORIZONS {
            let spec = HorizonSpec::new(t, DT).unwrap();
            for h in sweep_with_stride(&trial, &spec, ProfileKind::Oracle, 5).unwrap() {
                assert!(h.error_series.iter().all(|e| *e <= 1e-12), "{} T {t}", trial.label());
                assert_eq!(h.direction_score, 1);
            }
        }
    }
}

#[test]
fn parallel_sweep_matches_serial() {
    let family = FamilySpec { seed: 5, ..FamilySpec::new(FamilyKind::Mixed, 1, 2, 1) };
    for trial in make_family(&family).unwrap() {
        let spec = HorizonSpec::new(375, DT).unwrap();
        for kind in ProfileKind::ALL {
            assert_eq!(par_sweep(&trial, &spec, kind, 1).unwrap(), sweep(&trial, &spec, kind).unwrap());
            assert_eq!(par_sweep(&trial, &spec, kind, 4).unwrap(), sweep_with_stride(&trial, &spec, kind, 4).unwrap());
        }
    }
}

#[test]
fn horizon_count_barely_depends_on_length_for_long_trials() {
    let trial = discrepancy_trial([1.0, 0.0, 0.0], 150.0);
    let counts: Vec<f64> = HORIZONS
        .iter()
        .map(|&t| trial.horizon_count(&HorizonSpec::new(t, DT).unwrap(), 1) as f64)
        .collect();
    let (lo, hi) = counts.iter().fold((f64::MAX, 0.0_f64), |(l, h), c| (l.min(*c), h.max(*c)));
    assert!((hi - lo) / hi < 0.01);
}

#[test]
fn too_short_trials_are_reported() {
    let trial = discrepancy_trial([1.0, 0.0, 0.0], 0.1);
    let spec = HorizonSpec::new(125, DT).unwrap();
    assert!(matches!(
        sweep(&trial, &spec, ProfileKind::Zero),
        Err(compred_core::Error::TrialTooShort { needed: 26, len: 21, .. })
    ));
    assert!(predict_horizon(&trial, 0, &spec, ProfileKind::Zero).is_err());
}

#[test]
fn metric_me_sits_at_the_horizon_end() {
    let trial = discrepancy_trial([2.0, 0.0, 0.0], 1.0);
    for t in HORIZONS {
        let spec = HorizonSpec::new(t, DT).unwrap();
        let records = activity_records(std::slice::from_ref(&trial), &spec, ProfileKind::Zero, 1).unwrap();
        let m = MetricSummary::from_activities("s", ProfileKind::Zero, t, &records, AggregationMode::MeanOfMeans).unwrap();
        let want = kinematic_error(spec.n_samples, 2.0);
        assert!((m.me - want).abs() <= 1e-9 * want);
    }
}
