//! Forward simulation: the phenomenological single-degree-of-freedom
//! actuator model, the multi-pouch electrohydraulic actuator, and a
//! synthetic antagonistic clutch joint, with a fixed-step integrator and
//! steady-state solvers.

mod integrate;
mod joint;
mod pouch;
mod sdof;
mod static_poly;

pub use integrate::{simulate, step_zoh};
pub use joint::{EngagedSide, JointParams, JointPlant};
pub use pouch::{HaselPlant, PouchGeometry, PouchParams, VACUUM_PERMITTIVITY};
pub use sdof::{SdofParams, SdofPlant};
pub use static_poly::{StaticPolyParams, StaticPolyPlant};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A plant with scalar input, fixed state dimension and a scalar observable.
///
/// `rhs` must be a pure function of `(state, input)`; simulation owns the
/// state and plants stay immutable, so simulations can run in parallel.
pub trait Plant<T: Real> {
    fn state_dim(&self) -> usize;

    fn state_names(&self) -> Vec<String>;

    /// Time derivative of the state under the given input.
    fn rhs(&self, state: &[T], input: T, deriv: &mut [T]);

    /// The scalar observable used for identification and control.
    fn observable(&self, state: &[T], input: T) -> T;

    /// Geometric/physical validity of a state; a violation is a
    /// simulation fault.
    fn check_state(&self, _state: &[T]) -> Result<()> {
        Ok(())
    }

    /// Fastest local time constant, when the plant has a stiff subsystem
    /// whose rate depends on the state. Used by the integration stiffness
    /// guard (`dt <= tau / 10`).
    fn min_time_constant(&self, _state: &[T]) -> Option<T> {
        None
    }

    /// Equilibrium state for a constant input.
    fn steady_state(&self, input: T) -> Result<Vec<T>>;

    /// Per-component scales that make `rhs` components dimensionless for
    /// residual checks.
    fn residual_scales(&self) -> Vec<T> {
        vec![T::one(); self.state_dim()]
    }
}

/// Largest scaled residual component of `rhs` at a state.
pub fn scaled_residual<T: Real, P: Plant<T> + ?Sized>(plant: &P, state: &[T], input: T) -> T {
    let mut deriv = vec![T::zero(); plant.state_dim()];
    plant.rhs(state, input, &mut deriv);
    let scales = plant.residual_scales();
    deriv
        .iter()
        .zip(&scales)
        .map(|(&d, &s)| (d / s).abs())
        .fold(T::zero(), T::max)
}

/// Integrate under a constant input until the scaled residual drops below
/// `tol`, in chunks of `chunk` seconds, up to `max_time`.
pub fn settle<T: Real, P: Plant<T> + ?Sized>(
    plant: &P,
    input: T,
    initial: &[T],
    dt: T,
    chunk: T,
    max_time: T,
    tol: T,
) -> Result<Vec<T>> {
    let mut state = initial.to_vec();
    let steps_per_chunk = (chunk / dt).ceil().to_usize().unwrap().max(1);
    let mut elapsed = T::zero();
    loop {
        if scaled_residual(plant, &state, input) < tol {
            return Ok(state);
        }
        if elapsed >= max_time {
            return Err(Error::NoConvergence(format!(
                "residual {} above {tol} after {elapsed} s of settling",
                scaled_residual(plant, &state, input)
            )));
        }
        step_zoh(plant, &mut state, input, dt, steps_per_chunk);
        plant.check_state(&state)?;
        elapsed += dt * T::of_usize(steps_per_chunk);
    }
}
