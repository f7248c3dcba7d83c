//! Sample-sequential closed-loop runner for the antagonistic joint.
//!
//! Per sample: EMA-filter the measurement, form the tracking error,
//! compose the mode's command (feedforward from the inverted
//! slow-manifold map, PI feedback, or their sum), schedule the clutches,
//! then rate-limit and saturate the active-side voltage magnitude. The
//! integrator freezes whenever the tentative command would be altered by
//! the scheduler or the limiters (conditional integration). The plant is
//! stepped with the applied voltage held constant across the period.

use std::io::Write;

use crate::error::{Error, Result};
use crate::plants::{step_zoh, EngagedSide, JointPlant, Plant};
use crate::reduction::SlowManifoldModel;
use crate::scalar::Real;
use crate::signals::TimeSeries;

use super::clutch::{clutch_step, ClutchConfig, ClutchState};
use super::pi::{apply_limits, ema_step, ff_command, pi_step, PiConfig, PiState, SafetyLimits};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    FfOnly,
    FbOnly,
    FfFb,
}

impl ControlMode {
    pub fn uses_ff(self) -> bool {
        matches!(self, ControlMode::FfOnly | ControlMode::FfFb)
    }

    pub fn uses_fb(self) -> bool {
        matches!(self, ControlMode::FbOnly | ControlMode::FfFb)
    }

    pub fn label(self) -> &'static str {
        match self {
            ControlMode::FfOnly => "ff_only",
            ControlMode::FbOnly => "fb_only",
            ControlMode::FfFb => "ff_fb",
        }
    }
}

/// One logged control sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRow<T> {
    pub t: T,
    pub theta_d: T,
    pub theta_meas: T,
    pub theta_filtered: T,
    pub e: T,
    pub v_ff: T,
    pub v_fb: T,
    pub v_total_pre_limits: T,
    pub v_applied: T,
    pub engaged_side: i8,
    pub integrator_state: T,
    pub integrator_frozen: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlLog<T> {
    pub mode: ControlMode,
    pub seed: u64,
    /// FNV-1a over the reference bit patterns; equal across modes of one
    /// benchmark by construction.
    pub reference_checksum: u64,
    pub rows: Vec<LogRow<T>>,
}

impl<T: Real> ControlLog<T> {
    pub const CSV_HEADER: &'static str = "t,theta_d,theta_meas,theta_filtered,e,v_ff,v_fb,v_total_pre_limits,v_applied,engaged_side,integrator_state,integrator_frozen";

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{}",
                r.t,
                r.theta_d,
                r.theta_meas,
                r.theta_filtered,
                r.e,
                r.v_ff,
                r.v_fb,
                r.v_total_pre_limits,
                r.v_applied,
                r.engaged_side,
                r.integrator_state,
                u8::from(r.integrator_frozen)
            )?;
        }
        Ok(())
    }

    pub fn rms_error(&self) -> T {
        let sum: T = self.rows.iter().map(|r| r.e * r.e).sum();
        (sum / T::of_usize(self.rows.len())).sqrt()
    }

    pub fn max_abs_error(&self) -> T {
        self.rows.iter().map(|r| r.e.abs()).fold(T::zero(), T::max)
    }
}

fn reference_checksum<T: Real>(reference: &TimeSeries<T>) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    let mut feed = |bits: u64| {
        for byte in bits.to_le_bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x100000001b3);
        }
    };
    feed(reference.t0().to_f64().unwrap().to_bits());
    feed(reference.dt().to_f64().unwrap().to_bits());
    for &v in reference.values() {
        feed(v.to_f64().unwrap().to_bits());
    }
    hash
}

/// Mismatch tolerance used for the anti-windup "tentative would clamp"
/// test, relative to the command scale.
fn clamp_tolerance<T: Real>(command: T) -> T {
    T::lit(1e-9) * (T::one() + command.abs())
}

#[allow(clippy::too_many_arguments)]
pub fn run_closed_loop<T: Real>(
    plant: &JointPlant<T>,
    mode: ControlMode,
    sm: Option<&SlowManifoldModel<T>>,
    pi: &PiConfig<T>,
    limits: &SafetyLimits<T>,
    clutch_cfg: &ClutchConfig<T>,
    reference: &TimeSeries<T>,
    seed: u64,
    substeps: usize,
    initial: &[T],
) -> Result<ControlLog<T>> {
    if !reference.is_scalar() {
        return Err(Error::DimensionMismatch("reference must be scalar".into()));
    }
    let dt_rel = (reference.dt() - pi.period).abs() / pi.period;
    if dt_rel > T::lit(1e-9) {
        return Err(Error::InvalidParameter(
            "reference sample period must equal the control period".into(),
        ));
    }
    if mode.uses_ff() && sm.is_none() {
        return Err(Error::InvalidParameter(
            "feedforward modes need a slow-manifold model".into(),
        ));
    }
    if initial.len() != 6 {
        return Err(Error::DimensionMismatch("joint state has 6 components".into()));
    }
    if substeps == 0 {
        return Err(Error::InvalidParameter("need at least one substep".into()));
    }

    let n = reference.len();
    let dt_inner = pi.period / T::of_usize(substeps);
    let mut state = initial.to_vec();
    let mut pi_state = PiState::<T>::default();
    let mut clutch_state = ClutchState::<T>::default();
    let mut filtered = plant.observable(&state, T::zero());
    let mut prev_applied = T::zero();
    let mut first = true;
    let mut rows = Vec::with_capacity(n);

    for j in 0..n {
        let theta_d = reference.value(j);
        let theta_meas = plant.observable(&state, prev_applied);
        filtered = if first {
            first = false;
            theta_meas
        } else {
            ema_step(filtered, theta_meas, pi.ema_alpha)
        };
        let error = theta_d - filtered;

        let v_ff = if mode.uses_ff() {
            ff_command(sm.expect("checked above"), theta_d)?
        } else {
            T::zero()
        };
        // tentative feedback with the integrator advanced
        let (fb_tentative, pi_tentative) = if mode.uses_fb() {
            pi_step(pi_state, error, pi, false)
        } else {
            (T::zero(), pi_state)
        };
        let total_tentative = v_ff + fb_tentative;

        let (next_clutch, out) = clutch_step(
            clutch_state,
            total_tentative,
            theta_d,
            mode,
            clutch_cfg,
            pi.period,
        );
        clutch_state = next_clutch;
        let side = clutch_state.engaged;
        let sign: T = side.sign();

        let applied_for = |total: T, prev: T| -> T {
            if out.reset {
                // both sides commanded to exactly zero in one step
                return T::zero();
            }
            if side == EngagedSide::None {
                return T::zero();
            }
            // only the component consistent with the engaged side drives
            let magnitude_cmd = (sign * total).max(T::zero()) * out.scale;
            let magnitude = apply_limits(prev.abs(), magnitude_cmd, limits);
            sign * magnitude
        };

        let applied_tentative = applied_for(total_tentative, prev_applied);
        let frozen = mode.uses_fb()
            && (applied_tentative - total_tentative).abs() > clamp_tolerance(total_tentative);

        let (v_fb, total, applied) = if frozen {
            let (v_fb, next_pi) = pi_step(pi_state, error, pi, true);
            pi_state = next_pi;
            let total = v_ff + v_fb;
            (v_fb, total, applied_for(total, prev_applied))
        } else {
            pi_state = pi_tentative;
            (fb_tentative, total_tentative, applied_tentative)
        };

        rows.push(LogRow {
            t: reference.time(j),
            theta_d,
            theta_meas,
            theta_filtered: filtered,
            e: error,
            v_ff,
            v_fb,
            v_total_pre_limits: total,
            v_applied: applied,
            engaged_side: side.as_i8(),
            integrator_state: pi_state.integral,
            integrator_frozen: frozen,
        });

        prev_applied = applied;
        if j + 1 < n {
            step_zoh_clutched(plant, &mut state, applied, side, dt_inner, substeps);
        }
    }

    Ok(ControlLog {
        mode,
        seed,
        reference_checksum: reference_checksum(reference),
        rows,
    })
}

/// RK4 substeps under an explicit clutch command (the open-loop `rhs`
/// would re-derive the side from the voltage sign; the scheduler owns it
/// here).
fn step_zoh_clutched<T: Real>(
    plant: &JointPlant<T>,
    state: &mut [T],
    applied: T,
    side: EngagedSide,
    dt: T,
    steps: usize,
) {
    struct Clutched<'a, T> {
        plant: &'a JointPlant<T>,
        side: EngagedSide,
    }
    impl<T: Real> crate::plants::Plant<T> for Clutched<'_, T> {
        fn state_dim(&self) -> usize {
            6
        }
        fn state_names(&self) -> Vec<String> {
            self.plant.state_names()
        }
        fn rhs(&self, state: &[T], input: T, deriv: &mut [T]) {
            self.plant.rhs_with_clutch(state, input, self.side, deriv);
        }
        fn observable(&self, state: &[T], input: T) -> T {
            self.plant.observable(state, input)
        }
        fn steady_state(&self, _input: T) -> crate::error::Result<Vec<T>> {
            unreachable!("not used for stepping")
        }
    }
    let clutched = Clutched { plant, side };
    step_zoh(&clutched, state, applied, dt, steps);
}
