//! Benchmark protocol: the three controller modes track the identical
//! reference under identical limits and clutch scheduling; per-mode
//! statistics cover tracking error, actuation effort and the
//! feedforward/feedback command decomposition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plants::JointPlant;
use crate::reduction::SlowManifoldModel;
use crate::scalar::Real;
use crate::signals::TimeSeries;

use super::clutch::ClutchConfig;
use super::pi::{PiConfig, SafetyLimits};
use super::runner::{run_closed_loop, ControlLog, ControlMode};

const RAD_TO_DEG: f64 = 180.0 / std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: crate::scalar::Real")]
pub struct ModeStats<T> {
    pub rms_error_deg: T,
    pub max_abs_error_deg: T,
    /// Mean of |u_right| + |u_left| per sample (one side active at a time,
    /// so this is the applied magnitude).
    pub effort_mean_v: T,
    pub effort_rms_v: T,
    /// Mean-|feedforward| share of the summed command decomposition.
    pub ff_share_mean: T,
    pub ff_mean_magnitude_v: T,
    pub fb_mean_magnitude_v: T,
    pub ff_rms_v: T,
    pub fb_rms_v: T,
    pub kp: T,
    pub ki: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: crate::scalar::Real")]
pub struct BenchmarkReport<T> {
    pub ff_fb: ModeStats<T>,
    pub ff_only: ModeStats<T>,
    pub fb_only: ModeStats<T>,
    pub reference_checksum: u64,
    pub seed: u64,
}

fn stats<T: Real>(log: &ControlLog<T>, pi: &PiConfig<T>) -> ModeStats<T> {
    let n = T::of_usize(log.rows.len());
    let mean = |f: &dyn Fn(&super::runner::LogRow<T>) -> T| -> T {
        log.rows.iter().map(|r| f(r)).sum::<T>() / n
    };
    let rms = |f: &dyn Fn(&super::runner::LogRow<T>) -> T| -> T {
        (log.rows.iter().map(|r| f(r) * f(r)).sum::<T>() / n).sqrt()
    };
    let ff_mean = mean(&|r| r.v_ff.abs());
    let fb_mean = mean(&|r| r.v_fb.abs());
    let decomposition = ff_mean + fb_mean;
    let ff_share = if decomposition > T::zero() {
        ff_mean / decomposition
    } else {
        T::zero()
    };
    let to_deg = T::lit(RAD_TO_DEG);
    ModeStats {
        rms_error_deg: log.rms_error() * to_deg,
        max_abs_error_deg: log.max_abs_error() * to_deg,
        effort_mean_v: mean(&|r| r.v_applied.abs()),
        effort_rms_v: rms(&|r| r.v_applied),
        ff_share_mean: ff_share,
        ff_mean_magnitude_v: ff_mean,
        fb_mean_magnitude_v: fb_mean,
        ff_rms_v: rms(&|r| r.v_ff),
        fb_rms_v: rms(&|r| r.v_fb),
        kp: pi.kp,
        ki: pi.ki,
    }
}

/// Run all three modes on the identical reference and limits. `gains`
/// carries one tuned PI config per feedback-bearing mode (the
/// feedforward-only entry only contributes period and filter settings).
#[allow(clippy::too_many_arguments)]
pub fn benchmark<T: Real>(
    plant: &JointPlant<T>,
    sm: &SlowManifoldModel<T>,
    gains_ff_fb: &PiConfig<T>,
    gains_fb_only: &PiConfig<T>,
    base: &PiConfig<T>,
    limits: &SafetyLimits<T>,
    clutch: &ClutchConfig<T>,
    reference: &TimeSeries<T>,
    seed: u64,
    substeps: usize,
    initial: &[T],
) -> Result<(BenchmarkReport<T>, Vec<ControlLog<T>>)> {
    let ff_cfg = PiConfig {
        kp: T::zero(),
        ki: T::zero(),
        ..*base
    };
    let runs = [
        (ControlMode::FfFb, *gains_ff_fb),
        (ControlMode::FfOnly, ff_cfg),
        (ControlMode::FbOnly, *gains_fb_only),
    ];
    let mut logs = Vec::with_capacity(3);
    for (mode, cfg) in &runs {
        logs.push(run_closed_loop(
            plant,
            *mode,
            Some(sm),
            cfg,
            limits,
            clutch,
            reference,
            seed,
            substeps,
            initial,
        )?);
    }
    let checksum = logs[0].reference_checksum;
    if logs.iter().any(|l| l.reference_checksum != checksum) {
        return Err(Error::Model("modes saw different references".into()));
    }
    let report = BenchmarkReport {
        ff_fb: stats(&logs[0], &runs[0].1),
        ff_only: stats(&logs[1], &runs[1].1),
        fb_only: stats(&logs[2], &runs[2].1),
        reference_checksum: checksum,
        seed,
    };
    Ok((report, logs))
}
