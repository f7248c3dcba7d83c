//! Trajectory-error and slowness metrics.
//!
//! `nmte` is the normalized mean trajectory error
//!
//! ```text
//! NMTE = (1/||x||) * (1/N) * sum_j ||x_j - xhat_j||
//! ```
//!
//! with `||x|| = max_j ||x_j||` (peak per-sample Euclidean norm) so the
//! result reads as a fraction of peak response.
//!
//! `slowness_rho` compares the derivative energy of an amplitude-normalized
//! forced signal against that of an amplitude-normalized autonomous decay:
//!
//! ```text
//! rho = (||d/dt g~||_L2 over [ti,tf]) / (||d/dt s~||_L2 over the decay)
//! ```
//!
//! For a linear decay `s = s0 e^{lambda t}` the denominator is `|lambda|`
//! exactly. All integrals use the trapezoid rule; derivatives use central
//! differences with one-sided stencils at the ends.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signals::series::{DecayReference, TimeSeries};

/// `sqrt(int f(t)^2 dt)` by the trapezoid rule on uniform samples.
pub fn trapezoid_l2_norm<T: Real>(values: &[T], dt: T) -> T {
    debug_assert!(values.len() >= 2);
    let half = T::lit(0.5);
    let mut acc = half * (values[0] * values[0] + values[values.len() - 1] * values[values.len() - 1]);
    for &v in &values[1..values.len() - 1] {
        acc += v * v;
    }
    (acc * dt).sqrt()
}

/// Central differences in the interior, one-sided at the endpoints.
pub fn central_difference<T: Real>(values: &[T], dt: T) -> Vec<T> {
    debug_assert!(values.len() >= 2);
    let n = values.len();
    let two_dt = dt + dt;
    let mut out = Vec::with_capacity(n);
    out.push((values[1] - values[0]) / dt);
    for j in 1..n - 1 {
        out.push((values[j + 1] - values[j - 1]) / two_dt);
    }
    out.push((values[n - 1] - values[n - 2]) / dt);
    out
}

/// Normalized mean trajectory error between two series of identical shape.
pub fn nmte<T: Real>(truth: &TimeSeries<T>, prediction: &TimeSeries<T>) -> Result<T> {
    if truth.len() != prediction.len() {
        return Err(Error::DimensionMismatch(format!(
            "lengths {} vs {}",
            truth.len(),
            prediction.len()
        )));
    }
    if truth.dim() != prediction.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dimensions {} vs {}",
            truth.dim(),
            prediction.dim()
        )));
    }
    if truth.dt() != prediction.dt() {
        return Err(Error::DimensionMismatch("sample periods differ".into()));
    }
    let norm = |s: &[T]| s.iter().map(|&v| v * v).sum::<T>().sqrt();
    let peak = truth.samples().map(norm).fold(T::zero(), T::max);
    if peak == T::zero() {
        return Err(Error::UndefinedMetric("truth signal has zero peak norm".into()));
    }
    let mut mean_dev = T::zero();
    for (x, xh) in truth.samples().zip(prediction.samples()) {
        let dev: T = x
            .iter()
            .zip(xh)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt();
        mean_dev += dev;
    }
    mean_dev /= T::of_usize(truth.len());
    Ok(mean_dev / peak)
}

/// Normalized derivative energy `||f'||_L2 / ||f||_L2` of a sampled signal.
fn rate<T: Real>(values: &[T], dt: T) -> Result<T> {
    let amplitude = trapezoid_l2_norm(values, dt);
    if amplitude == T::zero() {
        return Err(Error::UndefinedMetric("signal has zero energy".into()));
    }
    let deriv = central_difference(values, dt);
    Ok(trapezoid_l2_norm(&deriv, dt) / amplitude)
}

/// Dimensionless slowness of `forced` relative to the autonomous decay.
pub fn slowness_rho<T: Real>(decay: &DecayReference<T>, forced: &TimeSeries<T>) -> Result<T> {
    if !forced.is_scalar() {
        return Err(Error::DimensionMismatch("forced signal must be scalar".into()));
    }
    let forced_rate = rate(forced.values(), forced.dt())?;
    let decay_rate = match decay {
        DecayReference::Linear { lambda } => lambda.abs(),
        DecayReference::Series(series) => rate(series.values(), series.dt())?,
    };
    Ok(forced_rate / decay_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(values: &[f64]) -> TimeSeries<f64> {
        TimeSeries::scalar(0.0, 1.0, values.to_vec()).unwrap()
    }

    #[test]
    fn nmte_identity_is_zero() {
        let x = scalar(&[0.3, -1.2, 2.0, 0.7]);
        assert_eq!(nmte(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn nmte_constant_offset() {
        let truth = scalar(&[2.0; 4]);
        let pred = scalar(&[1.0; 4]);
        assert_eq!(nmte(&truth, &pred).unwrap(), 0.5);
    }

    #[test]
    fn nmte_hand_evaluated() {
        // (1/2)*(1/3)*(0+0+1) = 1/6
        let truth = scalar(&[0.0, 1.0, 2.0]);
        let pred = scalar(&[0.0, 1.0, 3.0]);
        let e = nmte(&truth, &pred).unwrap();
        assert!((e - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn nmte_rejects_bad_inputs() {
        let a = scalar(&[1.0, 2.0, 3.0]);
        let b = scalar(&[1.0, 2.0]);
        assert!(matches!(nmte(&a, &b), Err(Error::DimensionMismatch(_))));
        let z = scalar(&[0.0, 0.0, 0.0]);
        assert!(matches!(nmte(&z, &a), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn nmte_scale_invariant() {
        let truth = scalar(&[0.5, -0.25, 1.5, 0.9]);
        let pred = scalar(&[0.6, -0.20, 1.2, 1.0]);
        let e1 = nmte(&truth, &pred).unwrap();
        let c = -37.5;
        let e2 = nmte(&truth.map_values(|v| c * v), &pred.map_values(|v| c * v)).unwrap();
        assert!((e1 - e2).abs() < 1e-14);
    }

    #[test]
    fn rho_self_test_is_exactly_one() {
        let decay_series = TimeSeries::from_fn(0.0, 0.005, 2000, |t: f64| (-t).exp()).unwrap();
        let forced = decay_series.clone();
        let decay = DecayReference::from_series(decay_series).unwrap();
        assert_eq!(slowness_rho(&decay, &forced).unwrap(), 1.0);
    }

    #[test]
    fn rho_linear_decay_closed_form() {
        // gamma = sin(0.8 t) over full periods: ||g'||/||g|| = 0.8, so
        // rho = 0.8 / |lambda| = 0.4.
        let periods = 8.0 * 2.0 * std::f64::consts::PI / 0.8;
        let n = 20_000;
        let dt = periods / (n - 1) as f64;
        let forced = TimeSeries::from_fn(0.0, dt, n, |t: f64| (0.8 * t).sin()).unwrap();
        let decay = DecayReference::linear(-2.0).unwrap();
        let rho = slowness_rho(&decay, &forced).unwrap();
        assert!((rho - 0.4).abs() < 0.4 * 2e-3, "rho = {rho}");
    }

    #[test]
    fn rho_linear_agrees_with_sampled_exponential() {
        let lambda = -2.0f64;
        let decay_series =
            TimeSeries::from_fn(0.0, 0.002, 2400, |t: f64| (lambda * t).exp()).unwrap();
        let forced = TimeSeries::from_fn(0.0, 0.01, 1200, |t: f64| (0.3 * t).sin() + 0.1 * t).unwrap();
        let via_series =
            slowness_rho(&DecayReference::from_series(decay_series).unwrap(), &forced).unwrap();
        let via_linear =
            slowness_rho(&DecayReference::linear(lambda).unwrap(), &forced).unwrap();
        assert!(
            (via_series - via_linear).abs() < 0.02 * via_linear,
            "series {via_series} vs linear {via_linear}"
        );
    }

    #[test]
    fn rho_amplitude_invariant_and_stretch_scaling() {
        let decay = DecayReference::linear(-1.5).unwrap();
        let n = 4001;
        let dt = 10.0 / (n - 1) as f64;
        let f = |t: f64| (0.7 * t).sin() + 0.3 * (1.9 * t).cos();
        let base = TimeSeries::from_fn(0.0, dt, n, f).unwrap();
        let rho = slowness_rho(&decay, &base).unwrap();

        let scaled = base.map_values(|v| 123.0 * v);
        let rho_scaled = slowness_rho(&decay, &scaled).unwrap();
        assert!((rho - rho_scaled).abs() < 1e-12 * rho);

        // replay at half speed: same waveform over twice the duration
        let slow = TimeSeries::from_fn(0.0, 2.0 * dt, n, |t: f64| f(t / 2.0)).unwrap();
        let rho_slow = slowness_rho(&decay, &slow).unwrap();
        assert!(
            (rho_slow - rho / 2.0).abs() < 0.02 * (rho / 2.0),
            "rho {rho}, half-speed {rho_slow}"
        );
    }
}
