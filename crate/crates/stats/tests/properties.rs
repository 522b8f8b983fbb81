use compred_stats::{bonferroni, cohens_d, welch_anova, welch_t_test, CohensDVariant};
use proptest::prelude::*;

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, 3..12)
        .prop_filter("needs spread", |v| v.iter().any(|x| (x - v[0]).abs() > 1e-3))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #[test]
    fn welch_t_is_antisymmetric(a in sample(), b in sample()) {
        let ab = welch_t_test(&a, &b).unwrap();
        let ba = welch_t_test(&b, &a).unwrap();
        prop_assert_eq!(ab.statistic.unwrap(), -ba.statistic.unwrap());
        prop_assert_eq!(ab.p_value, ba.p_value);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
    }

    #[test]
    fn statistics_are_scale_invariant(a in sample(), b in sample(), c in sample(), k in 0.01f64..1000.0) {
        let scale = |v: &[f64]| v.iter().map(|x| x * k).collect::<Vec<_>>();
        let (sa, sb, sc) = (scale(&a), scale(&b), scale(&c));
        let t0 = welch_t_test(&a, &b).unwrap();
        let t1 = welch_t_test(&sa, &sb).unwrap();
        prop_assert!(close(t0.statistic.unwrap(), t1.statistic.unwrap(), 1e-12));
        prop_assert!((t0.p_value - t1.p_value).abs() <= 1e-12);
        let f0 = welch_anova(&[&a, &b, &c]).unwrap();
        let f1 = welch_anova(&[&sa, &sb, &sc]).unwrap();
        prop_assert!(close(f0.statistic.unwrap(), f1.statistic.unwrap(), 1e-12));
        prop_assert!((f0.p_value - f1.p_value).abs() <= 1e-12);
        let d0 = cohens_d(&a, &b, CohensDVariant::Pooled).unwrap();
        let d1 = cohens_d(&sa, &sb, CohensDVariant::Pooled).unwrap();
        prop_assert!(close(d0, d1, 1e-12));
    }

    #[test]
    fn bonferroni_is_monotone_and_conservative(mut ps in prop::collection::vec(0.0f64..=1.0, 1..8), extra in 0usize..5) {
        ps.sort_by(f64::total_cmp);
        let m = ps.len() + extra;
        let adj = bonferroni(&ps, m);
        for (p, q) in ps.iter().zip(&adj) {
            prop_assert!(q >= p);
            prop_assert!(*q <= 1.0);
            prop_assert_eq!(*q, (p * m as f64).min(1.0));
        }
        prop_assert!(adj.windows(2).all(|w| w[0] <= w[1]));
    }
}
