use audit_core::predictive::{contingency_with_bias, npv, ppv, PredictiveParams};
use audit_core::pvplot::{build_series, classify, significance_counts, PValueSeries};
use audit_core::searchspace::summarize_values;
use audit_core::stats::{p_from_ratio_ci, P_FLOOR};
use audit_core::{EffectRecord, PollutantDataset};
use proptest::prelude::*;

fn unit() -> impl Strategy<Value = f64> {
    0.001f64..0.999
}

fn record() -> impl Strategy<Value = (f64, f64, f64)> {
    // log rr, se
    (-2.0f64..2.0, 0.001f64..1.0)
        .prop_map(|(y, se)| (y.exp(), (y - 1.96 * se).exp(), (y + 1.96 * se).exp()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn contingency_conserves_mass(a in unit(), b in unit(), p in unit(), u in 0.0f64..0.999, c in 1.0f64..1e4) {
        let k = contingency_with_bias(&PredictiveParams::with_count(a, b, p, u, c).unwrap()).unwrap();
        let tol = 1e-12 * c;
        prop_assert!((k.tp + k.fn_ - c * p).abs() <= tol);
        prop_assert!((k.fp + k.tn - c * (1.0 - p)).abs() <= tol);
        prop_assert!((k.tp + k.fn_ + k.fp + k.tn - c).abs() <= tol);
        prop_assert!(k.tp >= 0.0 && k.fn_ >= 0.0 && k.fp >= 0.0 && k.tn >= 0.0);
    }

    #[test]
    fn ppv_matches_counts_and_ignores_c(a in unit(), b in unit(), p in unit(), u in 0.0f64..0.999, c in 1.0f64..1e4) {
        let one = PredictiveParams::new(a, b, p, u).unwrap();
        let many = PredictiveParams::with_count(a, b, p, u, c).unwrap();
        let k = contingency_with_bias(&many).unwrap();
        prop_assert!((ppv(&one).unwrap() - k.tp / (k.tp + k.fp)).abs() < 1e-12);
        prop_assert!((npv(&one).unwrap() - k.tn / (k.tn + k.fn_)).abs() < 1e-12);
        prop_assert!((ppv(&one).unwrap() - ppv(&many).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ppv_falls_as_bias_rises(a in unit(), b in unit(), p in unit(), u1 in 0.0f64..0.99, du in 0.001f64..0.5) {
        let u2 = (u1 + du).min(0.999);
        let lo = ppv(&PredictiveParams::new(a, b, p, u1).unwrap()).unwrap();
        let hi = ppv(&PredictiveParams::new(a, b, p, u2).unwrap()).unwrap();
        // Bias pushes PPV toward the prevalence; it only falls when the test is informative.
        if 1.0 - b > a {
            prop_assert!(hi <= lo + 1e-12);
        }
    }

    #[test]
    fn npv_does_not_depend_on_bias(a in unit(), b in unit(), p in unit(), u1 in 0.0f64..0.999, u2 in 0.0f64..0.999) {
        let x = npv(&PredictiveParams::new(a, b, p, u1).unwrap()).unwrap();
        let y = npv(&PredictiveParams::new(a, b, p, u2).unwrap()).unwrap();
        prop_assert!((x - y).abs() <= 1e-12);
    }

    #[test]
    fn p_values_in_range((rr, lcl, ucl) in record()) {
        let p = p_from_ratio_ci(rr, lcl, ucl, 0.95).unwrap();
        prop_assert!(p.raw > 0.0 && p.raw <= 1.0);
        prop_assert!(p.clamped >= P_FLOOR && p.clamped <= 1.0);
    }

    #[test]
    fn p_symmetric_in_direction((rr, lcl, ucl) in record()) {
        let a = p_from_ratio_ci(rr, lcl, ucl, 0.95).unwrap();
        let b = p_from_ratio_ci(1.0 / rr, 1.0 / ucl, 1.0 / lcl, 0.95).unwrap();
        prop_assert!((a.raw - b.raw).abs() < 1e-12);
    }

    #[test]
    fn series_is_sorted_permutation(recs in prop::collection::vec(record(), 1..60)) {
        let records: Vec<EffectRecord> = recs
            .iter()
            .enumerate()
            .map(|(i, &(rr, l, u))| EffectRecord::new(format!("s{i:03}"), rr, l, u).unwrap())
            .collect();
        let ds = PollutantDataset::new("prop", records.clone()).unwrap();
        let s = build_series(&ds).unwrap();
        prop_assert_eq!(s.len(), records.len());
        prop_assert!(s.entries.windows(2).all(|w| w[0].p_clamped <= w[1].p_clamped));
        prop_assert!(s.entries.iter().enumerate().all(|(i, e)| e.rank == i + 1));
        let mut got: Vec<f64> = s.raw();
        let mut want: Vec<f64> = records.iter().map(|r| r.p_value().unwrap().raw).collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        prop_assert_eq!(got, want);

        let c = significance_counts(&s);
        prop_assert_eq!(c.n_gt_05 + c.n_le_05, c.n);
        prop_assert!(c.n_le_001 <= c.n_le_05);
    }

    #[test]
    fn classify_ignores_duplication(ps in prop::collection::vec(0.0f64..=1.0, 5..60)) {
        let once: Vec<(String, f64)> = ps.iter().enumerate().map(|(i, &p)| (format!("a{i:03}"), p)).collect();
        let mut twice = once.clone();
        twice.extend(ps.iter().enumerate().map(|(i, &p)| (format!("b{i:03}"), p)));
        let a = classify(&PValueSeries::from_values("x", once).unwrap()).unwrap();
        let b = classify(&PValueSeries::from_values("x", twice).unwrap()).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert!((a.frac_sig - b.frac_sig).abs() < 1e-12);
        prop_assert!((a.frac_tiny - b.frac_tiny).abs() < 1e-12);
        prop_assert!((a.frac_blade - b.frac_blade).abs() < 1e-12);
        prop_assert!((a.frac_sig + a.frac_null - 1.0).abs() < 1e-12);
    }

    #[test]
    fn summary_is_ordered(v in prop::collection::vec(0u64..1_000_000, 1..80)) {
        let s = summarize_values(&v).unwrap();
        prop_assert!(s.minimum <= s.lower_quartile);
        prop_assert!(s.lower_quartile <= s.median);
        prop_assert!(s.median <= s.upper_quartile);
        prop_assert!(s.upper_quartile <= s.maximum);
        prop_assert!(s.minimum <= s.mean && s.mean <= s.maximum);
    }
}
