//! Single-degree-of-freedom phenomenological actuator model:
//!
//! ```text
//! m x'' + (c - beta u^2) x' + k x + alpha x^3 = gamma u^2
//! ```
//!
//! The voltage-squared term both forces the oscillator and weakens the
//! effective damping, so the input modulates the relaxation time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::Plant;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound = "T: crate::scalar::Real")]
pub struct SdofParams<T> {
    pub mass: T,
    pub stiffness: T,
    pub base_damping: T,
    pub cubic_stiffness: T,
    pub damping_coupling: T,
    pub forcing_gain: T,
}

impl<T: Real> Default for SdofParams<T> {
    fn default() -> Self {
        SdofParams {
            mass: T::lit(0.022),
            stiffness: T::one(),
            base_damping: T::lit(0.3),
            cubic_stiffness: T::lit(0.7),
            damping_coupling: T::lit(5e-3),
            forcing_gain: T::lit(0.5),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdofPlant<T> {
    params: SdofParams<T>,
    max_input: T,
}

impl<T: Real> SdofPlant<T> {
    /// `max_input` declares the input range; the effective damping must
    /// stay positive across it.
    pub fn new(params: SdofParams<T>, max_input: T) -> Result<Self> {
        if !(params.mass > T::zero() && params.stiffness > T::zero() && params.base_damping > T::zero())
        {
            return Err(Error::InvalidParameter(
                "mass, stiffness and base damping must be positive".into(),
            ));
        }
        if !(max_input >= T::zero()) {
            return Err(Error::InvalidParameter("input range must be nonnegative".into()));
        }
        let effective = params.base_damping - params.damping_coupling * max_input * max_input;
        if !(effective > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "effective damping {effective} nonpositive at max input {max_input}"
            )));
        }
        Ok(SdofPlant { params, max_input })
    }

    pub fn params(&self) -> &SdofParams<T> {
        &self.params
    }

    pub fn max_input(&self) -> T {
        self.max_input
    }

    /// The two roots of `m s^2 + c s + k = 0` at zero input, slow first.
    /// Only meaningful for the overdamped parameter regime.
    pub fn linear_poles(&self) -> (T, T) {
        let p = &self.params;
        let half = T::lit(0.5);
        let disc = (p.base_damping * p.base_damping - T::lit(4.0) * p.mass * p.stiffness).sqrt();
        let slow = half * (-p.base_damping + disc) / p.mass;
        let fast = half * (-p.base_damping - disc) / p.mass;
        (slow, fast)
    }
}

impl<T: Real> Plant<T> for SdofPlant<T> {
    fn state_dim(&self) -> usize {
        2
    }

    fn state_names(&self) -> Vec<String> {
        vec!["x".into(), "v".into()]
    }

    fn rhs(&self, state: &[T], input: T, deriv: &mut [T]) {
        let p = &self.params;
        let (x, v) = (state[0], state[1]);
        let u2 = input * input;
        let damping = p.base_damping - p.damping_coupling * u2;
        deriv[0] = v;
        deriv[1] = (p.forcing_gain * u2 - damping * v - p.stiffness * x - p.cubic_stiffness * x * x * x)
            / p.mass;
    }

    fn observable(&self, state: &[T], _input: T) -> T {
        state[0]
    }

    /// Newton on the monotone cubic `k x + alpha x^3 = gamma u^2`.
    fn steady_state(&self, input: T) -> Result<Vec<T>> {
        let p = &self.params;
        let target = p.forcing_gain * input * input;
        let mut x = T::zero();
        for _ in 0..100 {
            let f = p.stiffness * x + p.cubic_stiffness * x * x * x - target;
            let df = p.stiffness + T::lit(3.0) * p.cubic_stiffness * x * x;
            let step = f / df;
            x -= step;
            if step.abs() <= T::lit(1e-16) * (T::one() + x.abs()) {
                return Ok(vec![x, T::zero()]);
            }
        }
        Err(Error::NoConvergence("sdof equilibrium".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plants::{scaled_residual, simulate};
    use crate::signals::TimeSeries;

    fn plant() -> SdofPlant<f64> {
        SdofPlant::new(SdofParams::default(), 3.0).unwrap()
    }

    /// Bisection oracle for `k x + alpha x^3 = gamma u^2`, independent of
    /// the Newton path used by `steady_state`.
    fn cubic_bisection(u: f64) -> f64 {
        let target = 0.5 * u * u;
        let f = |x: f64| x + 0.7 * x * x * x - target;
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn origin_is_fixed_point_at_zero_input() {
        let p = plant();
        let mut d = [0.0; 2];
        p.rhs(&[0.0, 0.0], 0.0, &mut d);
        assert_eq!(d, [0.0, 0.0]);
    }

    #[test]
    fn acceleration_from_rest_is_gain_over_mass() {
        let p = plant();
        let mut d = [0.0; 2];
        p.rhs(&[0.0, 0.0], 1.0, &mut d);
        assert_eq!(d[0], 0.0);
        assert!((d[1] - 0.5 / 0.022).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_matches_cubic_bisection_oracle() {
        let p = plant();
        for u in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let state = p.steady_state(u).unwrap();
            let oracle = cubic_bisection(u);
            assert!(
                (state[0] - oracle).abs() < 1e-8,
                "u={u}: {} vs {}",
                state[0],
                oracle
            );
            assert!(scaled_residual(&p, &state, u) < 1e-10);
        }
        // frozen value for u = 1 (50-digit solve of x + 0.7 x^3 = 0.5)
        let x1 = p.steady_state(1.0).unwrap()[0];
        assert!((x1 - 0.44026386052217178).abs() < 1e-12);
    }

    #[test]
    fn rejects_damping_loss_over_input_range() {
        // c - beta u^2 crosses zero near u = 7.75 for the defaults
        assert!(SdofPlant::new(SdofParams::<f64>::default(), 10.0).is_err());
    }

    #[test]
    fn free_decay_reaches_origin() {
        let p = plant();
        let input = TimeSeries::from_fn(0.0, 0.01, 5001, |_: f64| 0.0).unwrap();
        let out = simulate(&p, &input, &[0.1, 0.0], 1e-3).unwrap();
        let x_final = out.sample(out.len() - 1)[0];
        assert!(x_final.abs() < 1e-4, "x(50) = {x_final}");
    }

    #[test]
    fn rk4_is_fourth_order_and_converged_at_working_step() {
        let p = plant();
        let input = TimeSeries::from_fn(0.0, 0.2, 26, |t: f64| 1.0 + 0.8 * (0.9 * t).sin()).unwrap();
        let initial = [0.3, 0.0];
        let run = |dt: f64| {
            let out = simulate(&p, &input, &initial, dt).unwrap();
            let s = out.sample(out.len() - 1);
            [s[0], s[1]]
        };
        // order estimate on coarse steps
        let (a, b, c) = (run(0.05), run(0.025), run(0.0125));
        let reference = run(0.0125 / 8.0);
        let err = |s: [f64; 2]| {
            ((s[0] - reference[0]).powi(2) + (s[1] - reference[1]).powi(2)).sqrt()
        };
        let (ea, eb, ec) = (err(a), err(b), err(c));
        let order_ab = (ea / eb).log2();
        let order_bc = (eb / ec).log2();
        assert!(order_ab > 3.5 && order_bc > 3.5, "orders {order_ab}, {order_bc}");
        // halving a fine working step changes the endpoint by < 1e-6 relative
        let fine = run(1e-3);
        let finer = run(5e-4);
        let scale = (fine[0].powi(2) + fine[1].powi(2)).sqrt().max(1e-30);
        let change = ((fine[0] - finer[0]).powi(2) + (fine[1] - finer[1]).powi(2)).sqrt() / scale;
        assert!(change < 1e-6, "relative change {change}");
    }

    #[test]
    fn simulate_is_deterministic() {
        let p = plant();
        let input = TimeSeries::from_fn(0.0, 0.05, 200, |t: f64| (0.3 * t).sin().abs()).unwrap();
        let a = simulate(&p, &input, &[0.0, 0.0], 1e-3).unwrap();
        let b = simulate(&p, &input, &[0.0, 0.0], 1e-3).unwrap();
        assert_eq!(a, b);
    }
}
