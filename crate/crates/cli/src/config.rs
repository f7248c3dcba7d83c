//! Experiment configuration schemas. Configs are strict JSON: unknown
//! keys are rejected, and every path is resolved relative to the config
//! file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use ssmred_core::plants::{
    HaselPlant, JointParams, JointPlant, Plant, PouchParams, SdofParams, SdofPlant,
    StaticPolyParams, StaticPolyPlant,
};
use ssmred_core::reduction::EmbeddingSpec;
use ssmred_core::signals::{DecayReference, TimeSeries};

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantConfig {
    Sdof {
        #[serde(default)]
        params: SdofParams<f64>,
        max_input: f64,
    },
    Hasel {
        #[serde(default)]
        params: PouchParams<f64>,
    },
    Joint {
        #[serde(default)]
        params: JointParams<f64>,
        max_input: f64,
    },
    StaticPoly {
        params: StaticPolyParams<f64>,
    },
}

impl PlantConfig {
    pub fn build(&self) -> CliResult<Box<dyn Plant<f64>>> {
        Ok(match self {
            PlantConfig::Sdof { params, max_input } => {
                Box::new(SdofPlant::new(params.clone(), *max_input)?)
            }
            PlantConfig::Hasel { params } => Box::new(HaselPlant::new(params.clone())?),
            PlantConfig::Joint { params, max_input } => {
                Box::new(JointPlant::new(params.clone(), *max_input)?)
            }
            PlantConfig::StaticPoly { params } => Box::new(StaticPolyPlant::new(params.clone())?),
        })
    }

    pub fn build_joint(&self) -> CliResult<JointPlant<f64>> {
        match self {
            PlantConfig::Joint { params, max_input } => {
                Ok(JointPlant::new(params.clone(), *max_input)?)
            }
            _ => Err(CliError::Config(
                "the control benchmark needs a plant of type `joint`".into(),
            )),
        }
    }
}

/// One top-level object per plant name.
pub type PlantsSection = BTreeMap<String, PlantConfig>;

pub fn select_plant<'a>(plants: &'a PlantsSection, name: &str) -> CliResult<&'a PlantConfig> {
    plants
        .get(name)
        .ok_or_else(|| CliError::Config(format!("plant `{name}` not defined in `plants`")))
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecaySpec {
    /// Closed-form linear decay rate (1/s, negative).
    Linear { lambda: f64 },
    /// Record a jump-release decay on the configured plant.
    JumpRelease {
        u_from: f64,
        u_to: f64,
        duration: f64,
        dt: f64,
        dt_integration: f64,
    },
}

impl DecaySpec {
    pub fn build(&self, plant: &dyn Plant<f64>) -> CliResult<DecayReference<f64>> {
        Ok(match self {
            DecaySpec::Linear { lambda } => DecayReference::linear(*lambda)?,
            DecaySpec::JumpRelease {
                u_from,
                u_to,
                duration,
                dt,
                dt_integration,
            } => ssmred_core::pipeline::record_decay_reference(
                plant,
                *u_from,
                *u_to,
                *duration,
                *dt,
                *dt_integration,
            )?,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    Constant {
        value: f64,
        duration: f64,
        dt: f64,
    },
    Steps {
        levels: Vec<f64>,
        hold: f64,
        dt: f64,
    },
    SlowRandom {
        seed: u64,
        duration: f64,
        dt: f64,
        range: [f64; 2],
        target_rho: f64,
        #[serde(default)]
        ramp_in: Option<f64>,
    },
}

impl InputSpec {
    pub fn build(&self, decay: Option<&DecayReference<f64>>) -> CliResult<TimeSeries<f64>> {
        match self {
            InputSpec::Constant { value, duration, dt } => {
                let n = (duration / dt).round() as usize + 1;
                Ok(TimeSeries::from_fn(0.0, *dt, n, |_| *value)?)
            }
            InputSpec::Steps { levels, hold, dt } => {
                if levels.is_empty() {
                    return Err(CliError::Config("steps input needs levels".into()));
                }
                let per = (hold / dt).round() as usize;
                if per == 0 {
                    return Err(CliError::Config("hold must cover at least one sample".into()));
                }
                let values: Vec<f64> = levels
                    .iter()
                    .flat_map(|&v| std::iter::repeat(v).take(per))
                    .collect();
                Ok(TimeSeries::scalar(0.0, *dt, values)?)
            }
            InputSpec::SlowRandom {
                seed,
                duration,
                dt,
                range,
                target_rho,
                ramp_in,
            } => {
                let decay = decay.ok_or_else(|| {
                    CliError::Config("slow_random input requires a `decay` section".into())
                })?;
                let series = ssmred_core::signals::gen_slow_input(
                    *seed,
                    &ssmred_core::signals::SlowInputSpec {
                        duration: *duration,
                        dt: *dt,
                        min: range[0],
                        max: range[1],
                        target_rho: *target_rho,
                    },
                    decay,
                )?;
                Ok(match ramp_in {
                    Some(ramp) => ssmred_core::signals::ramp_in(&series, *ramp),
                    None => series,
                })
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Steady { input: f64 },
    State { values: Vec<f64> },
}

impl InitialSpec {
    pub fn build(&self, plant: &dyn Plant<f64>) -> CliResult<Vec<f64>> {
        match self {
            InitialSpec::Steady { input } => Ok(plant.steady_state(*input)?),
            InitialSpec::State { values } => {
                if values.len() != plant.state_dim() {
                    return Err(CliError::Config(format!(
                        "initial state has {} components, plant needs {}",
                        values.len(),
                        plant.state_dim()
                    )));
                }
                Ok(values.clone())
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub plants: PlantsSection,
    pub plant: String,
    pub initial: InitialSpec,
    pub input: InputSpec,
    pub dt_integration: f64,
    #[serde(default)]
    pub decay: Option<DecaySpec>,
    pub output_dir: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmSection {
    pub order: u32,
    pub seeds: Vec<u64>,
    pub duration: f64,
    pub range: [f64; 2],
    pub target_rho: f64,
}

fn default_jump_offsets() -> Vec<i64> {
    vec![-1, 1]
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssmSection {
    pub grid: Vec<f64>,
    #[serde(default = "default_jump_offsets")]
    pub jump_offsets: Vec<i64>,
    pub decay_duration: f64,
    #[serde(default)]
    pub embedding: EmbeddingSpec,
    #[serde(default = "default_order")]
    pub parametrization_order: u32,
    #[serde(default = "default_order")]
    pub dynamics_order: u32,
    #[serde(default = "default_trim")]
    pub transient_trim: f64,
    #[serde(default)]
    pub shared_tangent: bool,
}

fn default_order() -> u32 {
    3
}

fn default_trim() -> f64 {
    0.6
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifyConfig {
    pub plants: PlantsSection,
    pub plant: String,
    pub sample_dt: f64,
    pub dt_integration: f64,
    #[serde(default)]
    pub decay: Option<DecaySpec>,
    #[serde(default)]
    pub sm: Option<SmSection>,
    #[serde(default)]
    pub assm: Option<AssmSection>,
    pub output_dir: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoSweepConfig {
    pub plants: PlantsSection,
    pub plant: String,
    pub decay: DecaySpec,
    pub rho_targets: Vec<f64>,
    /// One seed per target; defaults to seed_base + index.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub seed_base: u64,
    pub duration: f64,
    pub sample_dt: f64,
    pub dt_integration: f64,
    pub range: [f64; 2],
    pub sm_model: String,
    pub assm_model: String,
    #[serde(default = "default_one")]
    pub substeps: usize,
    #[serde(default = "default_true")]
    pub transport: bool,
    pub output_dir: String,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    pub seed: u64,
    pub duration: f64,
    pub amplitude_deg: f64,
    pub target_rho: f64,
    #[serde(default)]
    pub ramp_in: Option<f64>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub kp: f64,
    pub ki: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningSection {
    pub kp_range: [f64; 2],
    pub ki_range: [f64; 2],
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
}

fn default_points() -> usize {
    9
}

fn default_sweeps() -> usize {
    2
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiSection {
    pub period: f64,
    #[serde(default = "default_alpha")]
    pub ema_alpha: f64,
}

fn default_alpha() -> f64 {
    0.1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSection {
    pub v_min: f64,
    pub v_max: f64,
    pub dv_max: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ClutchSection {
    #[serde(default)]
    pub dead_zone: Option<f64>,
    #[serde(default)]
    pub engagement_time: Option<f64>,
    #[serde(default)]
    pub ramp_time: Option<f64>,
    #[serde(default)]
    pub cooldown_time: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlBenchConfig {
    pub plants: PlantsSection,
    pub plant: String,
    pub sm_model: String,
    pub decay: DecaySpec,
    pub reference: ReferenceSection,
    pub calibration: ReferenceSection,
    pub pi: PiSection,
    /// Fixed gains; omit to tune on the calibration reference.
    #[serde(default)]
    pub gains_ff_fb: Option<GainsSection>,
    #[serde(default)]
    pub gains_fb_only: Option<GainsSection>,
    #[serde(default)]
    pub tuning: Option<TuningSection>,
    pub limits: LimitsSection,
    #[serde(default)]
    pub clutch: ClutchSection,
    #[serde(default = "default_one")]
    pub substeps: usize,
    pub seed: u64,
    pub output_dir: String,
}

/// Load a strict JSON config and resolve the output directory against the
/// config file location.
pub fn load<C: serde::de::DeserializeOwned>(path: &Path) -> CliResult<(C, PathBuf)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: C = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((config, base))
}

pub fn resolve(base: &Path, relative: &str) -> PathBuf {
    let p = Path::new(relative);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
