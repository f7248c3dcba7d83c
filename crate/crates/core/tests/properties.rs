//! Property tests for the metric, embedding and limiter invariants.

use proptest::prelude::*;

use ssmred_core::control::{apply_limits, SafetyLimits};
use ssmred_core::reduction::delay_embed;
use ssmred_core::signals::{nmte, TimeSeries};

fn series_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, 2..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nmte_is_zero_on_identity_and_scale_invariant(
        values in series_strategy(64),
        scale in prop_oneof![-1e3..-1e-3f64, 1e-3..1e3f64],
    ) {
        let x = TimeSeries::scalar(0.0, 0.1, values).unwrap();
        prop_assume!(x.values().iter().any(|&v| v != 0.0));
        prop_assert_eq!(nmte(&x, &x).unwrap(), 0.0);

        let noisy = x.map_values(|v| v + 0.5);
        let e = nmte(&x, &noisy).unwrap();
        let e_scaled = nmte(
            &x.map_values(|v| scale * v),
            &noisy.map_values(|v| scale * v),
        ).unwrap();
        prop_assert!((e - e_scaled).abs() <= 1e-9 * e.max(1e-30));
    }

    #[test]
    fn delay_embedding_first_row_is_the_series(
        values in series_strategy(128),
        window in 1usize..6,
        delay in 1usize..4,
    ) {
        let n = values.len();
        prop_assume!(n > (window - 1) * delay);
        let s = TimeSeries::scalar(0.0, 0.01, values).unwrap();
        let m = delay_embed(&s, window, delay).unwrap();
        prop_assert_eq!(m.ncols(), n - (window - 1) * delay);
        for j in 0..m.ncols() {
            prop_assert_eq!(m[(0, j)], s.value(j));
        }
    }

    #[test]
    fn limiter_respects_rate_and_saturation(
        prev in 0.0..5.0f64,
        candidate in -20.0..20.0f64,
        dv in 1e-3..1.0f64,
    ) {
        let limits = SafetyLimits { v_min: 0.0, v_max: 5.0, dv_max: dv };
        let out = apply_limits(prev, candidate, &limits);
        prop_assert!(out >= limits.v_min && out <= limits.v_max);
        prop_assert!((out - prev).abs() <= dv + 1e-12);
        // idempotent on its own output
        prop_assert_eq!(apply_limits(prev, out, &limits), out);
    }

    #[test]
    fn csv_round_trip_is_exact(values in series_strategy(64)) {
        let padded = if values.len() % 2 == 1 {
            let mut v = values.clone();
            v.push(0.25);
            v
        } else {
            values
        };
        prop_assume!(padded.len() >= 4);
        let ts = TimeSeries::new(0.0, 0.05, 2, padded).unwrap();
        let mut buf = Vec::new();
        ts.write_csv(&["a", "b"], &mut buf).unwrap();
        let (back, _) = TimeSeries::<f64>::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, ts);
    }
}
