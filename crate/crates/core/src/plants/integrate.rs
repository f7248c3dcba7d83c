//! Classic fixed-step fourth-order Runge-Kutta stepping.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signals::TimeSeries;

use super::Plant;

/// One RK4 step with the input linearly interpolated across the step.
fn rk4_step<T: Real, P: Plant<T> + ?Sized>(
    plant: &P,
    state: &mut [T],
    u_start: T,
    u_end: T,
    dt: T,
    work: &mut Rk4Work<T>,
) {
    let half = T::lit(0.5);
    let sixth = T::lit(1.0 / 6.0);
    let u_mid = half * (u_start + u_end);
    let n = state.len();

    plant.rhs(state, u_start, &mut work.k1);
    for i in 0..n {
        work.stage[i] = state[i] + half * dt * work.k1[i];
    }
    plant.rhs(&work.stage, u_mid, &mut work.k2);
    for i in 0..n {
        work.stage[i] = state[i] + half * dt * work.k2[i];
    }
    plant.rhs(&work.stage, u_mid, &mut work.k3);
    for i in 0..n {
        work.stage[i] = state[i] + dt * work.k3[i];
    }
    plant.rhs(&work.stage, u_end, &mut work.k4);
    for i in 0..n {
        let two = T::lit(2.0);
        state[i] += dt * sixth * (work.k1[i] + two * work.k2[i] + two * work.k3[i] + work.k4[i]);
    }
}

struct Rk4Work<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    stage: Vec<T>,
}

impl<T: Real> Rk4Work<T> {
    fn new(n: usize) -> Self {
        Rk4Work {
            k1: vec![T::zero(); n],
            k2: vec![T::zero(); n],
            k3: vec![T::zero(); n],
            k4: vec![T::zero(); n],
            stage: vec![T::zero(); n],
        }
    }
}

/// Advance `state` by `steps` RK4 substeps of size `dt` under a constant
/// (zero-order-hold) input. This is the stepping primitive of the
/// closed-loop runner.
pub fn step_zoh<T: Real, P: Plant<T> + ?Sized>(
    plant: &P,
    state: &mut [T],
    input: T,
    dt: T,
    steps: usize,
) {
    let mut work = Rk4Work::new(state.len());
    for _ in 0..steps {
        rk4_step(plant, state, input, input, dt, &mut work);
    }
}

/// Fixed-step RK4 simulation of `plant` under a sampled input held
/// piecewise-linear between samples. The output carries the full state plus
/// the observable as the last channel, downsampled to the input rate.
///
/// `dt_integration` must divide the input sample period; plants with a
/// stiff state-dependent subsystem additionally enforce
/// `dt_integration <= tau_min / 10` along the trajectory.
pub fn simulate<T: Real, P: Plant<T> + ?Sized>(
    plant: &P,
    input: &TimeSeries<T>,
    initial: &[T],
    dt_integration: T,
) -> Result<TimeSeries<T>> {
    if !input.is_scalar() {
        return Err(Error::DimensionMismatch("plant input must be scalar".into()));
    }
    if initial.len() != plant.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} components, plant has {}",
            initial.len(),
            plant.state_dim()
        )));
    }
    if !(dt_integration > T::zero()) {
        return Err(Error::InvalidParameter("integration step must be positive".into()));
    }
    let ratio = input.dt() / dt_integration;
    let substeps = ratio.round().to_usize().unwrap_or(0);
    let tol = T::default_epsilon() * T::lit(64.0) * ratio;
    if substeps == 0 || (ratio - T::of_usize(substeps)).abs() > tol {
        return Err(Error::InvalidParameter(format!(
            "integration step must divide the sample period (ratio {ratio})"
        )));
    }

    let n = input.len();
    let dim = plant.state_dim();
    let mut state = initial.to_vec();
    let mut work = Rk4Work::new(dim);
    let mut out = Vec::with_capacity(n * (dim + 1));

    for j in 0..n {
        plant.check_state(&state).map_err(|e| {
            Error::SimulationFault(format!("at t = {}: {e}", input.time(j)))
        })?;
        if let Some(tau) = plant.min_time_constant(&state) {
            if dt_integration > tau / T::lit(10.0) {
                return Err(Error::StiffnessGuard(format!(
                    "dt {} exceeds tau/10 = {} at t = {}",
                    dt_integration,
                    tau / T::lit(10.0),
                    input.time(j)
                )));
            }
        }
        let u_j = input.value(j);
        out.extend_from_slice(&state);
        out.push(plant.observable(&state, u_j));

        if j + 1 < n {
            let u_next = input.value(j + 1);
            for s in 0..substeps {
                let frac0 = T::of_usize(s) / T::of_usize(substeps);
                let frac1 = T::of_usize(s + 1) / T::of_usize(substeps);
                let u0 = u_j + (u_next - u_j) * frac0;
                let u1 = u_j + (u_next - u_j) * frac1;
                rk4_step(plant, &mut state, u0, u1, dt_integration, &mut work);
            }
        }
    }
    TimeSeries::new(input.t0(), input.dt(), dim + 1, out)
}
