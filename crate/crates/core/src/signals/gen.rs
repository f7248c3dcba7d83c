//! Random slowly varying input signals with a prescribed slowness.
//!
//! Construction: random piecewise-constant levels smoothed by a raised-
//! cosine kernel (an exact convex combination, so the amplitude range is
//! never violated), with the time axis stretched until the measured
//! slowness matches the target. The kernel width is fixed in units of the
//! hold length, so stretching rescales the waveform exactly and the
//! slowness is monotone in the stretch factor up to windowing effects;
//! log-bisection on the stretch closes the loop on `slowness_rho` itself.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signals::metrics::slowness_rho;
use crate::signals::series::{DecayReference, TimeSeries};

/// Everything but the seed and the decay reference.
#[derive(Clone, Debug)]
pub struct SlowInputSpec<T> {
    pub duration: T,
    pub dt: T,
    pub min: T,
    pub max: T,
    pub target_rho: T,
}

/// Smoothing kernel half-width in units of one hold segment.
const KERNEL_HALF_WIDTH: f64 = 0.75;
/// Relative slowness tolerance at which bisection stops (the contract is 5%).
const RHO_TOLERANCE: f64 = 0.02;
/// Total budget of slowness evaluations for bracketing plus bisection.
const MAX_EVALS: usize = 60;

fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Integral of the raised-cosine kernel from -inf to `z`.
fn kernel_cdf<T: Real>(z: T) -> T {
    let w = T::lit(KERNEL_HALF_WIDTH);
    if z <= -w {
        T::zero()
    } else if z >= w {
        T::one()
    } else {
        let pi = T::pi();
        (z + w / pi * (pi * z / w).sin()) / (w + w) + T::lit(0.5)
    }
}

/// Smoothed level-hold profile at `tau` (time in segment units). Levels are
/// clamped at the ends, so the result is a convex combination of levels.
fn profile<T: Real>(levels: &[T], tau: T) -> T {
    let w = T::lit(KERNEL_HALF_WIDTH);
    let lo = (tau - w - T::one()).floor().to_i64().unwrap();
    let hi = (tau + w).floor().to_i64().unwrap();
    let mut acc = T::zero();
    for i in lo..=hi {
        let weight = kernel_cdf(tau - T::from_i64(i).unwrap())
            - kernel_cdf(tau - T::from_i64(i + 1).unwrap());
        let idx = i.clamp(0, levels.len() as i64 - 1) as usize;
        acc += levels[idx] * weight;
    }
    acc
}

fn build_signal<T: Real>(
    seed: u64,
    spec: &SlowInputSpec<T>,
    n_samples: usize,
    stretch: T,
) -> Result<TimeSeries<T>> {
    let duration = spec.dt * T::of_usize(n_samples - 1);
    let n_levels = (duration / stretch).floor().to_usize().unwrap_or(0) + 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = spec.max - spec.min;
    let levels: Vec<T> = (0..n_levels)
        .map(|_| spec.min + span * T::lit(uniform01(&mut rng)))
        .collect();
    let values = (0..n_samples)
        .map(|j| profile(&levels, spec.dt * T::of_usize(j) / stretch))
        .collect();
    TimeSeries::scalar(T::zero(), spec.dt, values)
}

/// Deterministic random input within `[min, max]` whose slowness against
/// `decay` lands within 5% of `target_rho`.
pub fn gen_slow_input<T: Real>(
    seed: u64,
    spec: &SlowInputSpec<T>,
    decay: &DecayReference<T>,
) -> Result<TimeSeries<T>> {
    if !(spec.target_rho > T::zero()) {
        return Err(Error::InvalidParameter("target slowness must be positive".into()));
    }
    if !(spec.min < spec.max) {
        return Err(Error::InvalidParameter("amplitude range is empty".into()));
    }
    if !(spec.dt > T::zero()) || !(spec.duration > spec.dt) {
        return Err(Error::InvalidParameter("need duration > dt > 0".into()));
    }
    let n_samples = (spec.duration / spec.dt).round().to_usize().unwrap() + 1;
    let stretch_floor = spec.dt * T::lit(8.0);
    let mut evals = 0usize;
    let mut eval = |stretch: T| -> Result<(TimeSeries<T>, T)> {
        evals += 1;
        if evals > MAX_EVALS {
            return Err(Error::GenerationFailure(format!(
                "target rho {} not reached within {MAX_EVALS} evaluations",
                spec.target_rho
            )));
        }
        let series = build_signal(seed, spec, n_samples, stretch)?;
        let rho = slowness_rho(decay, &series)?;
        Ok((series, rho))
    };

    // One probe plus the exact 1/stretch scaling gives a good first guess.
    let probe = (spec.duration / T::lit(10.0)).max(stretch_floor);
    let (_, rho_probe) = eval(probe)?;
    if !(rho_probe > T::zero()) {
        return Err(Error::GenerationFailure("probe signal has zero slowness".into()));
    }
    let guess = (probe * rho_probe / spec.target_rho).max(stretch_floor);
    let tol = T::lit(RHO_TOLERANCE) * spec.target_rho;

    // Bracket: rho decreases with stretch, so lo should overshoot the
    // target and hi undershoot it.
    let mut lo = (guess * T::lit(0.5)).max(stretch_floor);
    let mut hi = guess * T::lit(2.0);
    let (series, mut rho_lo) = eval(lo)?;
    if (rho_lo - spec.target_rho).abs() <= tol {
        return Ok(series);
    }
    while rho_lo < spec.target_rho {
        if lo <= stretch_floor {
            return Err(Error::GenerationFailure(format!(
                "target rho {} unreachable at dt {}",
                spec.target_rho, spec.dt
            )));
        }
        lo = (lo * T::lit(0.5)).max(stretch_floor);
        let (series, r) = eval(lo)?;
        if (r - spec.target_rho).abs() <= tol {
            return Ok(series);
        }
        rho_lo = r;
    }
    let (series, mut rho_hi) = eval(hi)?;
    if (rho_hi - spec.target_rho).abs() <= tol {
        return Ok(series);
    }
    while rho_hi > spec.target_rho {
        hi *= T::lit(2.0);
        if hi > spec.duration * T::lit(1e4) {
            return Err(Error::GenerationFailure(
                "slowness target too small for this duration".into(),
            ));
        }
        let (series, r) = eval(hi)?;
        if (r - spec.target_rho).abs() <= tol {
            return Ok(series);
        }
        rho_hi = r;
    }

    // Log-bisection inside the bracket.
    loop {
        let mid = (lo * hi).sqrt();
        let (series, rho) = eval(mid)?;
        if (rho - spec.target_rho).abs() <= tol {
            return Ok(series);
        }
        if rho > spec.target_rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Scale a signal by a smoothstep ramp from 0 to 1 over `ramp` seconds,
/// so references start at zero without a step.
pub fn ramp_in<T: Real>(series: &TimeSeries<T>, ramp: T) -> TimeSeries<T> {
    let t0 = series.t0();
    let dt = series.dt();
    let values = series
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let t = dt * T::of_usize(j);
            let s = ((t - T::zero()) / ramp).clamp(T::zero(), T::one());
            let w = s * s * (T::lit(3.0) - T::lit(2.0) * s);
            v * w
        })
        .collect();
    TimeSeries::new(t0, dt, series.dim(), values).expect("same shape as input")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(duration: f64, dt: f64, range: (f64, f64), rho: f64) -> SlowInputSpec<f64> {
        SlowInputSpec {
            duration,
            dt,
            min: range.0,
            max: range.1,
            target_rho: rho,
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let decay = DecayReference::linear(-1.0).unwrap();
        let s = spec(60.0, 0.01, (0.0, 2.0), 0.3);
        let a = gen_slow_input(7, &s, &decay).unwrap();
        let b = gen_slow_input(7, &s, &decay).unwrap();
        assert_eq!(a, b);
        let c = gen_slow_input(8, &s, &decay).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn hits_target_rho_within_five_percent() {
        let decay = DecayReference::linear(-1.0).unwrap();
        let s = spec(120.0, 0.01, (0.0, 1.0), 0.1);
        let out = gen_slow_input(3, &s, &decay).unwrap();
        let rho = slowness_rho(&decay, &out).unwrap();
        assert!((0.095..=0.105).contains(&rho), "rho = {rho}");
    }

    #[test]
    fn respects_amplitude_range() {
        let decay = DecayReference::linear(-5.0).unwrap();
        let s = spec(40.0, 0.02, (0.0, 8000.0), 0.4);
        let out = gen_slow_input(11, &s, &decay).unwrap();
        let min = out.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = out.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(min >= 0.0 && max <= 8000.0, "range [{min}, {max}]");
        // the signal actually moves
        assert!(max - min > 1000.0);
    }

    #[test]
    fn unreachable_target_fails_cleanly() {
        let decay = DecayReference::linear(-1e-6).unwrap();
        // against such a slow decay, any signal at this dt is far too fast
        let s = spec(10.0, 0.01, (0.0, 1.0), 1e-9);
        assert!(matches!(
            gen_slow_input(1, &s, &decay),
            Err(Error::GenerationFailure(_))
        ));
    }
}
