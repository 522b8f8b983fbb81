//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every criterion is reported even when an earlier one fails; the process
//! exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use compred_cli::bundle::TABLE_FILES;
use compred_cli::config::RunConfig;
use compred_cli::pipeline::compute_metrics;
use compred_core::metrics::{activity_records, AggregationMode, MetricSummary};
use compred_core::prediction::{predict_horizon, sweep, sweep_with_stride, Trial};
use compred_core::profiles::{HorizonSpec, ProfileKind};
use compred_core::signal::Butterworth;
use compred_core::synth::{
    analytic_error, expected_ae, expected_me, make_family, make_trial, verify_quadratic_trend, zoh_error,
    zoh_expected_ae, zoh_expected_me, FamilyKind, FamilySpec, SyntheticKind, SyntheticSpec, TrendCheckConfig,
};
use compred_stats::dist::{f_cdf, t_cdf};
use compred_stats::{bonferroni, cohens_d, mean, sample_variance, welch_t_test, CohensDVariant};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DT: f64 = 0.005;
const HORIZONS: [u32; 5] = [125, 250, 375, 500, 625];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn rel(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn discrepancy_trial(c: f64, duration_s: f64) -> Trial {
    let mut spec = SyntheticSpec::new(SyntheticKind::ConstantDiscrepancy { c: [0.6 * c, 0.0, -0.8 * c] }, duration_s, DT);
    spec.initial_velocity = [0.3, 0.1, -0.2];
    make_trial(&spec, 0).unwrap()
}

/// Worst relative gap between the Zero-profile errors and `form(k)` over
/// every start and every k of every horizon length.
fn worst_error_gap(trials: &[(f64, Trial)], form: fn(usize, f64, f64) -> f64) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (c, trial) in trials {
        for t in HORIZONS {
            let spec = HorizonSpec::new(t, DT).unwrap();
            for h in sweep(trial, &spec, ProfileKind::Zero).unwrap() {
                for (i, e) in h.error_series.iter().enumerate() {
                    worst = worst.max(rel(*e, form(i + 1, DT, *c)));
                    checked += 1;
                }
            }
        }
    }
    (worst, checked)
}

fn criterion_1() -> Outcome {
    let clock = Instant::now();
    let trials: Vec<(f64, Trial)> = [0.5, 1.0, 2.0].map(|c| (c, discrepancy_trial(c, 2.0))).into();
    let (paper, checked) = worst_error_gap(&trials, analytic_error);
    let elapsed = clock.elapsed();
    let (exact, _) = worst_error_gap(&trials, zoh_error);
    check(
        paper <= 1e-9 && within(elapsed, 5.0),
        format!(
            "{checked} samples, worst rel err vs analytic_error {paper:.3e} (tol 1e-9), {:.2} s; \
             exact ZOH form (k-1)^2/2 worst rel err {exact:.3e}",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let clock = Instant::now();
    let mut worst_ae = 0.0f64;
    let mut worst_me = 0.0f64;
    let mut worst_zoh = 0.0f64;
    for c in [0.5, 1.0, 2.0] {
        let trial = discrepancy_trial(c, 1.5);
        for t in HORIZONS {
            let spec = HorizonSpec::new(t, DT).unwrap();
            let n = spec.n_samples;
            for h in sweep_with_stride(&trial, &spec, ProfileKind::Zero, 1).unwrap() {
                let s = h.summary();
                worst_ae = worst_ae.max(rel(s.mean_error(), expected_ae(n, DT, c)));
                worst_me = worst_me.max(rel(s.max_error, expected_me(n, DT, c)));
                worst_zoh = worst_zoh
                    .max(rel(s.mean_error(), zoh_expected_ae(n, DT, c)))
                    .max(rel(s.max_error, zoh_expected_me(n, DT, c)));
            }
        }
    }
    let ae_at = |t: u32| {
        let spec = HorizonSpec::new(t, DT).unwrap();
        predict_horizon(&discrepancy_trial(1.0, 1.0), 0, &spec, ProfileKind::Zero).unwrap().summary().mean_error()
    };
    let ratio = ae_at(250) / ae_at(125);
    let ratio_gap = rel(ratio, 2600.0 / 675.0);
    let elapsed = clock.elapsed();
    check(
        worst_ae <= 1e-9 && worst_me <= 1e-9 && ratio_gap <= 1e-9 && within(elapsed, 5.0),
        format!(
            "worst rel err AE {worst_ae:.3e}, ME {worst_me:.3e}; AE(51)/AE(26) = {ratio:.9} vs {:.9}; {:.2} s; \
             exact ZOH forms worst rel err {worst_zoh:.3e}, ratio {:.9}",
            2600.0 / 675.0,
            elapsed.as_secs_f64(),
            zoh_expected_ae(51, DT, 1.0) / zoh_expected_ae(26, DT, 1.0)
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut trials = make_family(&FamilySpec { seed: 3, ..FamilySpec::new(FamilyKind::Mixed, 2, 4, 1) }).unwrap();
    trials.extend(
        make_family(&FamilySpec {
            seed: 4,
            ..FamilySpec::new(FamilyKind::Reversal { accel: (0.8, 1.2), switch_s: (0.7, 0.9) }, 2, 1, 1)
        })
        .unwrap(),
    );
    let sinusoid =
        SyntheticKind::Sinusoid { amplitude: [0.5, 0.2, -0.3], frequency_hz: 1.3, phase: 0.4 };
    trials.push(make_trial(&SyntheticSpec::new(sinusoid, 3.0, DT), 0).unwrap());
    let mut worst = 0.0f64;
    for trial in &trials {
        for t in HORIZONS {
            let spec = HorizonSpec::new(t, DT).unwrap();
            for h in sweep(trial, &spec, ProfileKind::Oracle).unwrap() {
                worst = h.error_series.iter().fold(worst, |w, e| w.max(*e));
            }
        }
    }
    check(worst <= 1e-12, format!("{} trials, worst Oracle error {worst:.3e} m (tol 1e-12)", trials.len()))
}

fn criterion_4() -> Outcome {
    let clock = Instant::now();
    let family = FamilySpec {
        seed: 7,
        ..FamilySpec::new(FamilyKind::ConstantDiscrepancy { c: 1.0, relative_spread: 0.02 }, 10, 2, 1)
    };
    let trials = make_family(&family).unwrap();
    let report = verify_quadratic_trend(&trials, &HORIZONS, ProfileKind::Zero, &TrendCheckConfig::default()).unwrap();
    let elapsed = clock.elapsed();
    let q = report.quadratic_vs_linear_p.unwrap_or(f64::NAN);
    let cq = report.cubic_vs_quadratic_p.unwrap_or(f64::NAN);
    check(
        report.r_squared >= 0.999 && q < 1e-3 && cq > 0.05 && !report.degenerate && within(elapsed, 10.0),
        format!(
            "R^2 {:.6}, quadratic vs linear p {q:.3e}, cubic vs quadratic p {cq:.3}, {:.2} s",
            report.r_squared,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_5() -> Outcome {
    let clock = Instant::now();
    let family = FamilySpec {
        seed: 5,
        ..FamilySpec::new(FamilyKind::Reversal { accel: (0.8, 1.2), switch_s: (0.7, 0.9) }, 10, 2, 2)
    };
    let trials = make_family(&family).unwrap();
    let config = RunConfig::default();
    let rows = compute_metrics(&trials, &config, &mut Vec::new()).unwrap();
    let ada = |p: ProfileKind, t: u32| {
        let v: Vec<f64> = rows.iter().filter(|r| r.profile == p && r.horizon_ms == t).filter_map(|r| r.ada).collect();
        mean(&v)
    };
    let zero: Vec<f64> = HORIZONS.iter().map(|&t| ada(ProfileKind::Zero, t)).collect();
    let non_increasing = zero.windows(2).all(|w| w[1] <= w[0]);
    let ordered = HORIZONS.iter().all(|&t| {
        ada(ProfileKind::Oracle, t) >= ada(ProfileKind::CubicToZero, t)
            && ada(ProfileKind::CubicToZero, t) >= ada(ProfileKind::Zero, t)
    });
    let elapsed = clock.elapsed();
    let cubic: Vec<String> = HORIZONS.iter().map(|&t| format!("{:.4}", ada(ProfileKind::CubicToZero, t))).collect();
    let zero_s: Vec<String> = zero.iter().map(|v| format!("{v:.4}")).collect();
    check(
        non_increasing && ordered && within(elapsed, 10.0),
        format!(
            "ADA Zero [{}], Cubic [{}], Oracle {:.4} at 625 ms; {:.2} s",
            zero_s.join(", "),
            cubic.join(", "),
            ada(ProfileKind::Oracle, 625),
            elapsed.as_secs_f64()
        ),
    )
}

/// Amplitude of the `freq` component in the second half of `filter(tone)`,
/// by least squares on sine and cosine.
fn steady_gain(f: &Butterworth, freq: f64, fs: f64) -> f64 {
    let n = 8000;
    let x: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin()).collect();
    let y = f.filter(&x);
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, v) in y.iter().enumerate().skip(n / 2) {
        let w = 2.0 * std::f64::consts::PI * freq * i as f64 / fs;
        let (s, c) = w.sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        ys += v * s;
        yc += v * c;
    }
    let det = ss * cc - sc * sc;
    let a = (ys * cc - yc * sc) / det;
    let b = (yc * ss - ys * sc) / det;
    a.hypot(b)
}

fn criterion_6() -> Outcome {
    let fs = 1000.0;
    let f = Butterworth::lowpass(5, 20.0, fs).unwrap();
    let g20 = steady_gain(&f, 20.0, fs);
    let g200 = steady_gain(&f, 200.0, fs);
    let dc = *f.filter(&vec![1.0; 6000]).last().unwrap();
    let target = std::f64::consts::FRAC_1_SQRT_2;
    check(
        rel(g20, target) <= 0.01 && g200 < 1e-4 && (dc - 1.0).abs() <= 1e-9 && (f.magnitude(0.0, fs) - 1.0).abs() <= 1e-9,
        format!("gain 20 Hz {g20:.6} (1/sqrt2 {target:.6}), 200 Hz {g200:.3e}, DC {dc:.12}"),
    )
}

fn grid(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("df"))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn criterion_7() -> Outcome {
    let r = welch_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    let t = r.statistic.unwrap();
    let welch_ok = (t + 1.0).abs() <= 1e-12 && (r.df - 8.0).abs() <= 1e-12 && (r.p_value - 0.3466).abs() <= 5e-4;

    let mut worst_f = 0.0f64;
    for row in grid(include_str!("../../stats/tests/data/f_cdf_grid.csv")) {
        worst_f = worst_f.max((f_cdf(row[2], row[0], row[1]) - row[3]).abs());
    }
    let mut worst_t = 0.0f64;
    for row in grid(include_str!("../../stats/tests/data/t_cdf_grid.csv")) {
        worst_t = worst_t.max((t_cdf(row[1], row[0]) - row[2]).abs());
    }

    let p = [0.001, 0.02, 0.3, 0.5, 0.0125];
    let adjusted = bonferroni(&p, 5);
    let bonf_ok = p.iter().zip(&adjusted).all(|(p, a)| *a == (5.0 * p).min(1.0));

    // Ten values with sample mean 0 and sample SD 1, shifted by one.
    let raw: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin() + 0.1 * i as f64).collect();
    let (m, s) = (mean(&raw), sample_variance(&raw).sqrt());
    let b: Vec<f64> = raw.iter().map(|v| (v - m) / s).collect();
    let a: Vec<f64> = b.iter().map(|v| v + 1.0).collect();
    let d = cohens_d(&a, &b, CohensDVariant::Pooled).unwrap();

    check(
        welch_ok && worst_f <= 1e-10 && worst_t <= 1e-10 && bonf_ok && (d - 1.0).abs() <= 1e-12,
        format!(
            "Welch t {t:.6} df {:.6} p {:.6}; F cdf worst {worst_f:.2e}, t cdf worst {worst_t:.2e}; \
             Bonferroni exact {bonf_ok}; d {d:.15}",
            r.df, r.p_value
        ),
    )
}

fn random_bundle(rng: &mut ChaCha8Rng) -> (Vec<Trial>, ProfileKind, HorizonSpec, usize) {
    let activities = rng.random_range(1..=4);
    let spec = FamilySpec {
        static_activities: rng.random_range(0..activities),
        duration_s: rng.random_range(140..280) as f64 * DT,
        noise_amplitude: if rng.random_bool(0.5) { rng.random_range(0.0..0.3) } else { 0.0 },
        seed: rng.random(),
        ..FamilySpec::new(FamilyKind::Mixed, 1, activities, rng.random_range(1..=3))
    };
    let profile = *ProfileKind::ALL.choose(rng).unwrap();
    let horizon = HorizonSpec::new(*HORIZONS.choose(rng).unwrap(), DT).unwrap();
    (make_family(&spec).unwrap(), profile, horizon, rng.random_range(2..=9))
}

fn summarize(trials: &[Trial], profile: ProfileKind, horizon: &HorizonSpec, stride: usize) -> MetricSummary {
    let records = activity_records(trials, horizon, profile, stride).unwrap();
    MetricSummary::from_activities("S01", profile, horizon.horizon_ms, &records, AggregationMode::MeanOfMeans).unwrap()
}

fn bits(m: &MetricSummary) -> [Option<u64>; 4] {
    [Some(m.ae.to_bits()), Some(m.me.to_bits()), m.ada.map(f64::to_bits), m.mda.map(f64::to_bits)]
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut hierarchy, mut invariance) = (0, 0);
    for _ in 0..1000 {
        let (trials, profile, horizon, stride) = random_bundle(&mut rng);
        let m = summarize(&trials, profile, &horizon, stride);
        let dir_ok = match (m.ada, m.mda) {
            (Some(a), Some(d)) => d <= a,
            (None, None) => true,
            _ => false,
        };
        if !(m.ae <= m.me && dir_ok) {
            hierarchy += 1;
        }

        // Relabel activities and repeats by random bijections, then shuffle.
        let mut names: Vec<String> = (0..trials.len()).map(|i| format!("X{i:02}")).collect();
        names.shuffle(&mut rng);
        let acts: Vec<String> = {
            let mut a: Vec<String> = trials.iter().map(|t| t.activity_id.clone()).collect();
            a.dedup();
            a
        };
        let mut shuffled = trials.clone();
        let repeat_shift = rng.random_range(1..50);
        for t in &mut shuffled {
            let i = acts.iter().position(|a| *a == t.activity_id).unwrap();
            t.activity_id = names[i].clone();
            t.repeat_index = 100 - t.repeat_index * 7 + repeat_shift;
        }
        shuffled.shuffle(&mut rng);
        if bits(&summarize(&shuffled, profile, &horizon, stride)) != bits(&m) {
            invariance += 1;
        }
    }
    check(
        hierarchy == 0 && invariance == 0,
        format!("1000 bundles: {hierarchy} hierarchy violations, {invariance} permutation mismatches"),
    )
}

fn compred(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_compred")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Desk-scale synthetic manifest shared by criteria 9 and 10.
fn desk_data() -> &'static (tempfile::TempDir, PathBuf) {
    static DATA: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    DATA.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        let out = compred(&["synth", "--out", path(&data), "--noise", "0.05", "--seed", "1"]);
        assert!(out.status.success(), "synth failed: {}", String::from_utf8_lossy(&out.stderr));
        let manifest = PathBuf::from(String::from_utf8(out.stdout).unwrap().trim());
        (dir, manifest)
    })
}

fn run_into(out: &Path, threads: &str) -> Duration {
    let (_, manifest) = desk_data();
    let clock = Instant::now();
    let o = compred(&["run", "--manifest", path(manifest), "--out", path(out), "--threads", threads]);
    let elapsed = clock.elapsed();
    assert!(o.status.success(), "run failed: {}", String::from_utf8_lossy(&o.stderr));
    elapsed
}

fn criterion_9() -> Outcome {
    let (dir, _) = desk_data();
    let one = dir.path().join("threads1");
    let eight = dir.path().join("threads8");
    run_into(&one, "1");
    run_into(&eight, "8");
    let differing: Vec<&str> = TABLE_FILES
        .iter()
        .copied()
        .filter(|f| std::fs::read(one.join(f)).unwrap() != std::fs::read(eight.join(f)).unwrap())
        .collect();
    check(differing.is_empty(), format!("{} files compared, differing: {differing:?}", TABLE_FILES.len()))
}

fn criterion_10() -> Outcome {
    let (dir, _) = desk_data();
    let out = dir.path().join("desk");
    let elapsed = run_into(&out, "4");
    let missing: Vec<&str> = TABLE_FILES.iter().copied().filter(|f| !out.join(f).is_file()).collect();
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    let rows = metrics.lines().count() - 1;
    let empty: Vec<&str> = ["stats.csv", "fits.csv", "levels.csv", "trend_tests.csv"]
        .into_iter()
        .filter(|f| std::fs::read_to_string(out.join(f)).unwrap().lines().count() < 2)
        .collect();
    check(
        missing.is_empty() && empty.is_empty() && rows == 10 * 4 * 5 && within(elapsed, 60.0),
        format!(
            "10x14x3 trials, 4 profiles, 5 horizons in {:.2} s; {rows} metric rows; missing {missing:?}, empty {empty:?}",
            elapsed.as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("closed-form error per sample", criterion_1),
        ("closed-form AE and ME", criterion_2),
        ("oracle exactness", criterion_3),
        ("quadratic trend", criterion_4),
        ("direction accuracy degradation", criterion_5),
        ("filter response", criterion_6),
        ("statistics golden values", criterion_7),
        ("metric hierarchy invariants", criterion_8),
        ("thread-count determinism", criterion_9),
        ("desk-scale end to end", criterion_10),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
