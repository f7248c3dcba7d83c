//! Synthetic antagonistic joint: two muscle actuators on a lever, each
//! engaged through a clutch, exactly one side active at a time. The sign
//! of the scalar input selects the side; the engaged muscle receives the
//! input magnitude and transmits its elastic force as torque through the
//! moment arm, scaled by the clutch transmission efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{settle, Plant, SdofParams};

/// Which clutch is engaged. Serialized in logs as -1 / 0 / +1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EngagedSide {
    None,
    Left,
    Right,
}

impl EngagedSide {
    pub fn sign<T: Real>(self) -> T {
        match self {
            EngagedSide::None => T::zero(),
            EngagedSide::Left => -T::one(),
            EngagedSide::Right => T::one(),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            EngagedSide::None => 0,
            EngagedSide::Left => -1,
            EngagedSide::Right => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound = "T: crate::scalar::Real")]
pub struct JointParams<T> {
    /// Joint inertia, kg m^2.
    pub inertia: T,
    /// Viscous damping, N m s/rad.
    pub damping: T,
    /// Return-spring stiffness, N m/rad.
    pub return_stiffness: T,
    /// Tendon moment arm, m.
    pub moment_arm: T,
    /// Clutch transmission efficiency in (0, 1].
    pub clutch_efficiency: T,
    pub left_muscle: SdofParams<T>,
    pub right_muscle: SdofParams<T>,
}

impl<T: Real> Default for JointParams<T> {
    fn default() -> Self {
        JointParams {
            inertia: T::lit(0.002),
            damping: T::lit(0.05),
            return_stiffness: T::lit(0.15),
            moment_arm: T::lit(0.045),
            clutch_efficiency: T::lit(0.9),
            left_muscle: SdofParams::default(),
            right_muscle: SdofParams::default(),
        }
    }
}

/// State layout: `[theta, omega, x_left, v_left, x_right, v_right]`.
#[derive(Clone, Debug)]
pub struct JointPlant<T> {
    params: JointParams<T>,
    max_input: T,
}

impl<T: Real> JointPlant<T> {
    pub fn new(params: JointParams<T>, max_input: T) -> Result<Self> {
        if !(params.inertia > T::zero() && params.damping > T::zero() && params.moment_arm > T::zero())
        {
            return Err(Error::InvalidParameter(
                "inertia, damping and moment arm must be positive".into(),
            ));
        }
        if !(params.return_stiffness >= T::zero()) {
            return Err(Error::InvalidParameter("return stiffness must be nonnegative".into()));
        }
        if !(params.clutch_efficiency > T::zero() && params.clutch_efficiency <= T::one()) {
            return Err(Error::InvalidParameter("clutch efficiency must lie in (0, 1]".into()));
        }
        for muscle in [&params.left_muscle, &params.right_muscle] {
            let effective =
                muscle.base_damping - muscle.damping_coupling * max_input * max_input;
            if !(muscle.mass > T::zero() && muscle.stiffness > T::zero() && effective > T::zero()) {
                return Err(Error::InvalidParameter(
                    "muscle parameters invalid over the declared input range".into(),
                ));
            }
        }
        Ok(JointPlant { params, max_input })
    }

    pub fn params(&self) -> &JointParams<T> {
        &self.params
    }

    pub fn max_input(&self) -> T {
        self.max_input
    }

    fn muscle_rhs(muscle: &SdofParams<T>, x: T, v: T, u: T) -> (T, T) {
        let u2 = u * u;
        let damping = muscle.base_damping - muscle.damping_coupling * u2;
        let accel = (muscle.forcing_gain * u2
            - damping * v
            - muscle.stiffness * x
            - muscle.cubic_stiffness * x * x * x)
            / muscle.mass;
        (v, accel)
    }

    /// Elastic tendon tension of a muscle at contraction `x`. At the
    /// muscle equilibrium this equals `gamma u^2` exactly.
    pub fn tension(muscle: &SdofParams<T>, x: T) -> T {
        muscle.stiffness * x + muscle.cubic_stiffness * x * x * x
    }

    /// Dynamics under an explicit clutch command: the engaged muscle
    /// receives `|input|`, the other side coasts at zero input and
    /// transmits nothing.
    pub fn rhs_with_clutch(&self, state: &[T], input: T, engaged: EngagedSide, deriv: &mut [T]) {
        let p = &self.params;
        let magnitude = input.abs();
        let (u_l, u_r) = match engaged {
            EngagedSide::Left => (magnitude, T::zero()),
            EngagedSide::Right => (T::zero(), magnitude),
            EngagedSide::None => (T::zero(), T::zero()),
        };
        let (dxl, dvl) = Self::muscle_rhs(&p.left_muscle, state[2], state[3], u_l);
        let (dxr, dvr) = Self::muscle_rhs(&p.right_muscle, state[4], state[5], u_r);
        let torque = match engaged {
            EngagedSide::None => T::zero(),
            EngagedSide::Left => {
                -Self::tension(&p.left_muscle, state[2]) * p.moment_arm * p.clutch_efficiency
            }
            EngagedSide::Right => {
                Self::tension(&p.right_muscle, state[4]) * p.moment_arm * p.clutch_efficiency
            }
        };
        deriv[0] = state[1];
        deriv[1] = (torque - p.damping * state[1] - p.return_stiffness * state[0]) / p.inertia;
        deriv[2] = dxl;
        deriv[3] = dvl;
        deriv[4] = dxr;
        deriv[5] = dvr;
    }

    /// Steady joint angle under constant engagement at `|input|`:
    /// `theta* = gamma u^2 r eff / k_theta`, signed by the engaged side.
    pub fn steady_angle(&self, input: T) -> T {
        let p = &self.params;
        let muscle = if input >= T::zero() { &p.right_muscle } else { &p.left_muscle };
        let tension = muscle.forcing_gain * input * input;
        let magnitude = tension * p.moment_arm * p.clutch_efficiency / p.return_stiffness;
        if input >= T::zero() {
            magnitude
        } else {
            -magnitude
        }
    }
}

impl<T: Real> Plant<T> for JointPlant<T> {
    fn state_dim(&self) -> usize {
        6
    }

    fn state_names(&self) -> Vec<String> {
        ["theta", "omega", "x_left", "v_left", "x_right", "v_right"]
            .map(String::from)
            .to_vec()
    }

    /// Open-loop convention: the clutch follows the input sign instantly.
    fn rhs(&self, state: &[T], input: T, deriv: &mut [T]) {
        let engaged = if input > T::zero() {
            EngagedSide::Right
        } else if input < T::zero() {
            EngagedSide::Left
        } else {
            EngagedSide::None
        };
        self.rhs_with_clutch(state, input, engaged, deriv);
    }

    fn observable(&self, state: &[T], _input: T) -> T {
        state[0]
    }

    fn steady_state(&self, input: T) -> Result<Vec<T>> {
        let initial = vec![T::zero(); 6];
        settle(
            self,
            input,
            &initial,
            T::lit(1e-3),
            T::lit(2.0),
            T::lit(200.0),
            T::lit(1e-10),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plants::{simulate, step_zoh};
    use crate::signals::TimeSeries;

    fn plant() -> JointPlant<f64> {
        JointPlant::new(JointParams::default(), 3.0).unwrap()
    }

    #[test]
    fn disengaged_rest_state_is_fixed() {
        let p = plant();
        let mut d = [0.0; 6];
        p.rhs_with_clutch(&[0.0; 6], 0.0, EngagedSide::None, &mut d);
        assert_eq!(d, [0.0; 6]);
    }

    #[test]
    fn right_clutch_drives_positive_angle() {
        let p = plant();
        let mut state = vec![0.0; 6];
        step_zoh(&p, &mut state, 2.0, 1e-3, 200);
        assert!(state[0] > 0.0, "theta = {}", state[0]);
        // and the mirror image
        let mut state = vec![0.0; 6];
        step_zoh(&p, &mut state, -2.0, 1e-3, 200);
        assert!(state[0] < 0.0, "theta = {}", state[0]);
    }

    #[test]
    fn disengaged_joint_is_unforced_damped_oscillator() {
        let p = plant();
        let state = [0.4, -0.2, 0.1, 0.0, 0.2, 0.0];
        let mut d = [0.0; 6];
        p.rhs_with_clutch(&state, 0.0, EngagedSide::None, &mut d);
        let expected = (-0.05 * -0.2 - 0.15 * 0.4) / 0.002;
        assert!((d[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn settles_to_predicted_steady_angle() {
        let p = plant();
        for u in [1.0, 2.0, -1.5] {
            let state = p.steady_state(u).unwrap();
            let predicted = p.steady_angle(u);
            assert!(
                (state[0] - predicted).abs() < 1e-3 * predicted.abs(),
                "u={u}: {} vs {}",
                state[0],
                predicted
            );
        }
    }

    #[test]
    fn open_loop_sign_convention_in_simulate() {
        let p = plant();
        let input = TimeSeries::from_fn(0.0, 1e-3, 3001, |t: f64| if t < 1.5 { 2.0 } else { -2.0 })
            .unwrap();
        let out = simulate(&p, &input, &vec![0.0; 6], 1e-3).unwrap();
        let theta_mid = out.sample(1400)[0];
        let theta_end = out.sample(3000)[0];
        assert!(theta_mid > 0.5 * p.steady_angle(2.0));
        assert!(theta_end < 0.0);
    }
}
