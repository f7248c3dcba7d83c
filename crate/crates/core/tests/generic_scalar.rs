//! The core is generic over the scalar; exercise the f32 instantiation
//! end to end on the small plant.

use ssmred_core::plants::{simulate, Plant, SdofParams, SdofPlant};
use ssmred_core::poly::PolynomialMap;
use ssmred_core::signals::{nmte, TimeSeries};
use ssmred_core::{SdofPlant64, TimeSeries32};

#[test]
fn f32_simulation_tracks_f64_within_single_precision() {
    let p32 = SdofPlant::new(SdofParams::<f32>::default(), 3.0).unwrap();
    let p64: SdofPlant64 = SdofPlant::new(SdofParams::default(), 3.0).unwrap();

    let input32: TimeSeries32 =
        TimeSeries::from_fn(0.0f32, 0.01, 501, |t: f32| 1.0 + 0.5 * (0.8 * t).sin()).unwrap();
    let input64 =
        TimeSeries::from_fn(0.0f64, 0.01, 501, |t: f64| 1.0 + 0.5 * (0.8 * t).sin()).unwrap();

    let out32 = simulate(&p32, &input32, &[0.0f32, 0.0], 1e-3).unwrap();
    let out64 = simulate(&p64, &input64, &[0.0f64, 0.0], 1e-3).unwrap();

    let x32 = out32.sample(out32.len() - 1)[0] as f64;
    let x64 = out64.sample(out64.len() - 1)[0];
    assert!((x32 - x64).abs() < 1e-4 * x64.abs().max(1.0), "{x32} vs {x64}");
}

#[test]
fn f32_metrics_and_polynomials_work() {
    let truth: TimeSeries32 = TimeSeries::scalar(0.0f32, 1.0, vec![0.0, 1.0, 2.0]).unwrap();
    let pred: TimeSeries32 = TimeSeries::scalar(0.0f32, 1.0, vec![0.0, 1.0, 3.0]).unwrap();
    let e = nmte(&truth, &pred).unwrap();
    assert!((e - 1.0 / 6.0).abs() < 1e-6);

    let map = PolynomialMap::<f32>::from_univariate(&[1.0, -0.5, 0.25]);
    assert!((map.evaluate_scalar(2.0) - 1.0).abs() < 1e-6);

    let steady = SdofPlant::new(SdofParams::<f32>::default(), 3.0)
        .unwrap()
        .steady_state(1.0)
        .unwrap();
    assert!((steady[0] - 0.440_263_9).abs() < 1e-5);
}
