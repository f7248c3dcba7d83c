//! End-to-end recipes shared by the command-line tool and the acceptance
//! suite: recording decay references, generating training data on a plant
//! and fitting the reduced models from it.

use crate::error::{Error, Result};
use crate::plants::{simulate, Plant};
use crate::reduction::{
    build_assm, fit_local_ssm, fit_slow_manifold, AdiabaticSsmModel, LocalFitConfig,
    SlowManifoldModel,
};
use crate::scalar::Real;
use crate::signals::{gen_slow_input, DecayReference, SlowInputSpec, TimeSeries};

/// Record the autonomous decay observable after a jump from the settled
/// state at `u_from` to a constant `u_to`, shifted so its limit is zero.
pub fn record_decay_reference<T: Real, P: Plant<T> + ?Sized>(
    plant: &P,
    u_from: T,
    u_to: T,
    duration: T,
    sample_dt: T,
    dt_integration: T,
) -> Result<DecayReference<T>> {
    let series = record_jump_decay(plant, u_from, u_to, duration, sample_dt, dt_integration)?;
    let limit = {
        let settled = plant.steady_state(u_to)?;
        plant.observable(&settled, u_to)
    };
    DecayReference::from_series(series.map_values(|v| v - limit))
}

/// Observable trajectory of a jump-decay experiment: settle at `u_from`
/// exactly (algebraic steady state), then hold `u_to`.
pub fn record_jump_decay<T: Real, P: Plant<T> + ?Sized>(
    plant: &P,
    u_from: T,
    u_to: T,
    duration: T,
    sample_dt: T,
    dt_integration: T,
) -> Result<TimeSeries<T>> {
    let initial = plant.steady_state(u_from)?;
    let n = (duration / sample_dt).round().to_usize().unwrap() + 1;
    let input = TimeSeries::from_fn(T::zero(), sample_dt, n, |_| u_to)?;
    let out = simulate(plant, &input, &initial, dt_integration)?;
    out.channel(plant.state_dim())
}

/// Training plan for an input-indexed family of local models.
#[derive(Clone, Debug)]
pub struct AssmTrainingSpec<T> {
    /// Strictly increasing input levels.
    pub grid: Vec<T>,
    /// Jump origins per node, in grid steps (e.g. `[-4, -1, 1, 4]`);
    /// clamped to the grid and deduplicated. Far jumps populate the
    /// deviation amplitudes seen under operational forcing rates, near
    /// jumps the close-to-manifold region.
    pub jump_offsets: Vec<isize>,
    pub decay_duration: T,
    pub sample_dt: T,
    pub dt_integration: T,
    pub fit: LocalFitConfig<T>,
    pub shared_tangent: bool,
}

/// Fit the family by recording jump decays onto every grid node from the
/// configured origins and fitting one local model per node.
pub fn fit_assm_from_plant<T: Real, P: Plant<T> + ?Sized>(
    plant: &P,
    spec: &AssmTrainingSpec<T>,
) -> Result<AdiabaticSsmModel<T>> {
    if spec.grid.len() < 2 {
        return Err(Error::InvalidParameter("need at least two grid levels".into()));
    }
    if spec.jump_offsets.iter().all(|&o| o == 0) {
        return Err(Error::InvalidParameter("need at least one nonzero jump offset".into()));
    }
    let mut locals = Vec::with_capacity(spec.grid.len());
    for (i, &u_bar) in spec.grid.iter().enumerate() {
        let mut origins: Vec<usize> = spec
            .jump_offsets
            .iter()
            .map(|&o| (i as isize + o).clamp(0, spec.grid.len() as isize - 1) as usize)
            .filter(|&j| j != i)
            .collect();
        origins.sort_unstable();
        origins.dedup();
        let mut decays = Vec::new();
        for &j in &origins {
            decays.push(record_jump_decay(
                plant,
                spec.grid[j],
                u_bar,
                spec.decay_duration,
                spec.sample_dt,
                spec.dt_integration,
            )?);
        }
        locals.push(fit_local_ssm(&decays, u_bar, &spec.fit)?);
    }
    build_assm(locals, spec.fit.embedding, spec.shared_tangent)
}

/// Training plan for the direct slow-manifold fit from forced data.
#[derive(Clone, Debug)]
pub struct SmTrainingSpec<T> {
    pub seeds: Vec<u64>,
    pub duration: T,
    pub sample_dt: T,
    pub dt_integration: T,
    pub input_range: (T, T),
    pub target_rho: T,
    pub order: u32,
}

/// Record one forced trajectory: a random slow input at the target
/// slowness, simulated from the steady state of its first sample.
pub fn record_forced_response<T: Real, P: Plant<T> + ?Sized>(
    plant: &P,
    seed: u64,
    duration: T,
    sample_dt: T,
    dt_integration: T,
    input_range: (T, T),
    target_rho: T,
    decay: &DecayReference<T>,
) -> Result<(TimeSeries<T>, TimeSeries<T>)> {
    let input = gen_slow_input(
        seed,
        &SlowInputSpec {
            duration,
            dt: sample_dt,
            min: input_range.0,
            max: input_range.1,
            target_rho,
        },
        decay,
    )?;
    let initial = plant.steady_state(input.value(0))?;
    let out = simulate(plant, &input, &initial, dt_integration)?;
    let observable = out.channel(plant.state_dim())?;
    Ok((input, observable))
}

pub fn fit_sm_from_plant<T: Real, P: Plant<T> + ?Sized>(
    plant: &P,
    spec: &SmTrainingSpec<T>,
    decay: &DecayReference<T>,
) -> Result<SlowManifoldModel<T>> {
    if spec.seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one training seed".into()));
    }
    let mut pairs = Vec::with_capacity(spec.seeds.len());
    for &seed in &spec.seeds {
        pairs.push(record_forced_response(
            plant,
            seed,
            spec.duration,
            spec.sample_dt,
            spec.dt_integration,
            spec.input_range,
            spec.target_rho,
            decay,
        )?);
    }
    fit_slow_manifold(&pairs, spec.order)
}
