//! Gain tuning: coordinate descent over (kp, ki) on a log grid, minimizing
//! the RMS tracking error on a calibration reference under the same limits
//! and clutch scheduling as the benchmark itself.

use crate::error::Result;
use crate::plants::JointPlant;
use crate::reduction::SlowManifoldModel;
use crate::scalar::Real;
use crate::signals::TimeSeries;

use super::clutch::ClutchConfig;
use super::pi::{PiConfig, SafetyLimits};
use super::runner::{run_closed_loop, ControlMode};

#[derive(Clone, Debug)]
pub struct GainGrid<T> {
    pub kp_range: (T, T),
    pub ki_range: (T, T),
    /// Grid points per axis (log-spaced).
    pub points: usize,
    /// Coordinate-descent sweeps.
    pub sweeps: usize,
}

impl<T: Real> Default for GainGrid<T> {
    fn default() -> Self {
        GainGrid {
            kp_range: (T::lit(0.05), T::lit(50.0)),
            ki_range: (T::lit(0.05), T::lit(200.0)),
            points: 9,
            sweeps: 2,
        }
    }
}

fn log_grid<T: Real>(range: (T, T), points: usize) -> Vec<T> {
    let (lo, hi) = range;
    let ratio = (hi / lo).ln();
    (0..points)
        .map(|i| lo * (ratio * T::of_usize(i) / T::of_usize(points - 1)).exp())
        .collect()
}

/// Tune (kp, ki) for one mode. Returns the tuned config and its RMS error
/// on the calibration reference. Deterministic: ties resolve to the first
/// candidate scanned.
#[allow(clippy::too_many_arguments)]
pub fn tune_gains<T: Real>(
    plant: &JointPlant<T>,
    mode: ControlMode,
    sm: Option<&SlowManifoldModel<T>>,
    base: &PiConfig<T>,
    limits: &SafetyLimits<T>,
    clutch: &ClutchConfig<T>,
    calibration: &TimeSeries<T>,
    grid: &GainGrid<T>,
    substeps: usize,
    initial: &[T],
) -> Result<(PiConfig<T>, T)> {
    if !mode.uses_fb() {
        // feedforward-only has no gains to tune
        let cfg = PiConfig {
            kp: T::zero(),
            ki: T::zero(),
            ..*base
        };
        let log = run_closed_loop(
            plant, mode, sm, &cfg, limits, clutch, calibration, 0, substeps, initial,
        )?;
        return Ok((cfg, log.rms_error()));
    }

    let kp_grid = log_grid(grid.kp_range, grid.points);
    let ki_grid = log_grid(grid.ki_range, grid.points);
    let evaluate = |kp: T, ki: T| -> Result<T> {
        let cfg = PiConfig { kp, ki, ..*base };
        let log = run_closed_loop(
            plant, mode, sm, &cfg, limits, clutch, calibration, 0, substeps, initial,
        )?;
        Ok(log.rms_error())
    };

    let mut kp = kp_grid[grid.points / 2];
    let mut ki = ki_grid[grid.points / 2];
    let mut best = evaluate(kp, ki)?;
    for _ in 0..grid.sweeps {
        for &candidate in &kp_grid {
            let rms = evaluate(candidate, ki)?;
            if rms < best {
                best = rms;
                kp = candidate;
            }
        }
        for &candidate in &ki_grid {
            let rms = evaluate(kp, candidate)?;
            if rms < best {
                best = rms;
                ki = candidate;
            }
        }
    }
    Ok((PiConfig { kp, ki, ..*base }, best))
}
