//! Clutch scheduling state machine for the antagonistic pair.
//!
//! Exactly one clutch may be engaged at a time. A switch is requested when
//! the scheduling signal (the signed command in feedforward/combined
//! modes, the desired angle in feedback-only mode) traverses the dead zone
//! to the far side. The sequence is then: one Disengaging sample with both
//! clutches released and both voltages zeroed, an engagement wait on the
//! target clutch at zero voltage, a linear voltage ramp-in, and a cooldown
//! during which no further switch may trigger.

use serde::{Deserialize, Serialize};

use crate::plants::EngagedSide;
use crate::scalar::Real;

use super::runner::ControlMode;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: crate::scalar::Real")]
pub struct ClutchConfig<T> {
    /// Dead zone around zero command, volts.
    pub dead_zone: T,
    /// Mechanical engagement wait, seconds.
    pub engagement_time: T,
    /// Voltage ramp-in duration, seconds.
    pub ramp_time: T,
    /// Re-trigger lockout after a switch, seconds.
    pub cooldown_time: T,
}

impl<T: Real> Default for ClutchConfig<T> {
    fn default() -> Self {
        ClutchConfig {
            dead_zone: T::lit(0.05),
            engagement_time: T::lit(0.05),
            ramp_time: T::lit(0.1),
            cooldown_time: T::lit(0.2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClutchPhase<T> {
    Idle,
    /// Both clutches released for one sample before engaging the target.
    Disengaging { target: EngagedSide },
    EngagementWait { elapsed: T },
    Ramping { elapsed: T },
    Cooldown { elapsed: T },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClutchState<T> {
    pub engaged: EngagedSide,
    pub phase: ClutchPhase<T>,
}

impl<T: Real> Default for ClutchState<T> {
    fn default() -> Self {
        ClutchState {
            engaged: EngagedSide::None,
            phase: ClutchPhase::Idle,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClutchOutput<T> {
    pub left_on: bool,
    pub right_on: bool,
    /// Multiplier on the commanded voltage magnitude: 0 through the
    /// switch sequence, ramping linearly to 1, then 1.
    pub scale: T,
    /// True on the sample that zeroes both sides to start a switch; the
    /// slew check is exempt across it.
    pub reset: bool,
}

fn desired_side<T: Real>(
    command: T,
    desired_angle: T,
    mode: ControlMode,
    cfg: &ClutchConfig<T>,
) -> EngagedSide {
    let (signal, dead) = match mode {
        ControlMode::FbOnly => (desired_angle, T::zero()),
        _ => (command, cfg.dead_zone),
    };
    if signal > dead {
        EngagedSide::Right
    } else if signal < -dead {
        EngagedSide::Left
    } else {
        EngagedSide::None
    }
}

/// Advance the scheduler by one sample. Deterministic transition function;
/// returns the new state and the clutch lines / voltage scale to apply.
pub fn clutch_step<T: Real>(
    state: ClutchState<T>,
    command: T,
    desired_angle: T,
    mode: ControlMode,
    cfg: &ClutchConfig<T>,
    period: T,
) -> (ClutchState<T>, ClutchOutput<T>) {
    let want = desired_side(command, desired_angle, mode, cfg);
    let mut next = state;
    let mut reset = false;

    next.phase = match state.phase {
        ClutchPhase::Idle => {
            if want != EngagedSide::None && want != state.engaged {
                reset = true;
                next.engaged = EngagedSide::None;
                ClutchPhase::Disengaging { target: want }
            } else {
                ClutchPhase::Idle
            }
        }
        ClutchPhase::Disengaging { target } => {
            next.engaged = target;
            ClutchPhase::EngagementWait { elapsed: T::zero() }
        }
        ClutchPhase::EngagementWait { elapsed } => {
            let elapsed = elapsed + period;
            if elapsed >= cfg.engagement_time {
                ClutchPhase::Ramping { elapsed: T::zero() }
            } else {
                ClutchPhase::EngagementWait { elapsed }
            }
        }
        ClutchPhase::Ramping { elapsed } => {
            let elapsed = elapsed + period;
            if elapsed >= cfg.ramp_time {
                ClutchPhase::Cooldown { elapsed: T::zero() }
            } else {
                ClutchPhase::Ramping { elapsed }
            }
        }
        ClutchPhase::Cooldown { elapsed } => {
            let elapsed = elapsed + period;
            if elapsed >= cfg.cooldown_time {
                ClutchPhase::Idle
            } else {
                ClutchPhase::Cooldown { elapsed }
            }
        }
    };

    let scale = match next.phase {
        ClutchPhase::Idle | ClutchPhase::Cooldown { .. } => T::one(),
        ClutchPhase::Ramping { elapsed } => (elapsed / cfg.ramp_time).min(T::one()),
        ClutchPhase::Disengaging { .. } | ClutchPhase::EngagementWait { .. } => T::zero(),
    };
    let output = ClutchOutput {
        left_on: next.engaged == EngagedSide::Left && !matches!(next.phase, ClutchPhase::Disengaging { .. }),
        right_on: next.engaged == EngagedSide::Right
            && !matches!(next.phase, ClutchPhase::Disengaging { .. }),
        scale,
        reset,
    };
    (next, output)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ClutchConfig<f64> {
        ClutchConfig::default()
    }

    const TS: f64 = 0.001;

    fn run(
        mut state: ClutchState<f64>,
        commands: &[f64],
        mode: ControlMode,
    ) -> (ClutchState<f64>, Vec<ClutchOutput<f64>>) {
        let mut outs = Vec::new();
        for &c in commands {
            let (next, out) = clutch_step(state, c, c, mode, &cfg(), TS);
            state = next;
            outs.push(out);
        }
        (state, outs)
    }

    #[test]
    fn sign_flip_walks_through_the_sequence() {
        // engage right from rest
        let (state, outs) = run(ClutchState::default(), &[1.0; 2], ControlMode::FfOnly);
        assert!(matches!(state.phase, ClutchPhase::EngagementWait { .. }));
        assert_eq!(state.engaged, EngagedSide::Right);
        assert!(outs[0].reset && !outs[0].left_on && !outs[0].right_on);
        assert_eq!(outs[1].scale, 0.0);
        assert!(outs[1].right_on && !outs[1].left_on);

        // stay engaged through the wait, then ramp to full scale
        let (state, outs) = run(state, &[1.0; 400], ControlMode::FfOnly);
        assert!(matches!(state.phase, ClutchPhase::Idle));
        assert!(outs.iter().all(|o| o.right_on && !o.left_on));
        assert_eq!(outs.last().unwrap().scale, 1.0);
        // ramp is monotone from zero
        let scales: Vec<f64> = outs.iter().map(|o| o.scale).collect();
        assert!(scales.windows(2).all(|w| w[1] >= w[0] - 1e-12));

        // now flip the sign: new side only after the wait elapses
        let (state, outs) = run(state, &[-1.0; 60], ControlMode::FfOnly);
        assert_eq!(state.engaged, EngagedSide::Left);
        assert!(outs[0].reset);
        assert!(outs[..50].iter().all(|o| o.scale == 0.0));
        assert!(!outs[0].left_on && !outs[0].right_on);
        assert!(outs[2].left_on && !outs[2].right_on);
    }

    #[test]
    fn dead_zone_dither_does_not_trigger() {
        let (state, _) = run(ClutchState::default(), &[1.0; 500], ControlMode::FfOnly);
        assert_eq!(state.engaged, EngagedSide::Right);
        // wiggle inside the dead zone: no switch requested
        let commands: Vec<f64> = (0..300).map(|i| 0.04 * ((i % 2) as f64 * 2.0 - 1.0)).collect();
        let (state, outs) = run(state, &commands, ControlMode::FfOnly);
        assert_eq!(state.engaged, EngagedSide::Right);
        assert!(outs.iter().all(|o| o.right_on));
    }

    #[test]
    fn at_most_one_switch_per_cooldown_window() {
        // dithering command faster than the cooldown
        let mut state = ClutchState::default();
        let mut switches = Vec::new();
        let mut t = 0.0;
        for k in 0..3000 {
            let c = if (k / 40) % 2 == 0 { 1.0 } else { -1.0 };
            let (next, out) = clutch_step(state, c, c, ControlMode::FfFb, &cfg(), TS);
            if out.reset {
                switches.push(t);
            }
            state = next;
            t += TS;
        }
        assert!(switches.len() > 1);
        for pair in switches.windows(2) {
            let gap = pair[1] - pair[0];
            // full sequence: wait + ramp + cooldown before the next trigger
            assert!(gap >= 0.2, "switch gap {gap}");
        }
    }

    #[test]
    fn fb_mode_triggers_on_desired_angle_sign() {
        let mut state = ClutchState::default();
        // command says right, desired angle says left: fb mode follows the angle
        let (next, _) = clutch_step(state, 2.0, -0.3, ControlMode::FbOnly, &cfg(), TS);
        state = next;
        assert!(matches!(
            state.phase,
            ClutchPhase::Disengaging {
                target: EngagedSide::Left
            }
        ));
    }
}
