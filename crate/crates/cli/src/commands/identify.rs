use std::path::{Path, PathBuf};

use serde::Serialize;
use ssmred_core::pipeline::{fit_assm_from_plant, fit_sm_from_plant, AssmTrainingSpec, SmTrainingSpec};
use ssmred_core::reduction::{assm_to_json, sm_to_json, LocalFitConfig};

use crate::config::{load, select_plant, IdentifyConfig};
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelKind {
    Sm,
    Assm,
}

#[derive(Serialize)]
struct SmFitReport {
    condition: f64,
    residual_rel: f64,
    monotone: bool,
    increasing: bool,
    min_abs_slope: f64,
    max_abs_slope: f64,
    roundtrip_bound: Option<f64>,
    input_range: [f64; 2],
}

#[derive(Serialize)]
struct LocalReport {
    input_level: f64,
    parametrization_residual: f64,
    parametrization_condition: f64,
    dynamics_residual: f64,
    dynamics_condition: f64,
}

pub fn run(config_path: &Path, kind: ModelKind, out_override: &Option<PathBuf>) -> CliResult<()> {
    let (cfg, base) = load::<IdentifyConfig>(config_path)?;
    let out = super::output_dir(&base, &cfg.output_dir, out_override)?;
    let plant_cfg = select_plant(&cfg.plants, &cfg.plant)?;
    let plant = plant_cfg.build()?;

    match kind {
        ModelKind::Sm => {
            let section = cfg
                .sm
                .as_ref()
                .ok_or_else(|| CliError::Config("identify sm needs an `sm` section".into()))?;
            let decay_spec = cfg
                .decay
                .as_ref()
                .ok_or_else(|| CliError::Config("identify sm needs a `decay` section".into()))?;
            let decay = decay_spec.build(plant.as_ref())?;
            let model = fit_sm_from_plant(
                plant.as_ref(),
                &SmTrainingSpec {
                    seeds: section.seeds.clone(),
                    duration: section.duration,
                    sample_dt: cfg.sample_dt,
                    dt_integration: cfg.dt_integration,
                    input_range: (section.range[0], section.range[1]),
                    target_rho: section.target_rho,
                    order: section.order,
                },
                &decay,
            )?;
            super::write_text(&out.join("sm_model.json"), &sm_to_json(&model)?)?;
            let d = model.diagnostics();
            let (lo, hi) = model.input_range();
            let report = SmFitReport {
                condition: d.condition,
                residual_rel: d.residual_rel,
                monotone: d.monotone,
                increasing: d.increasing,
                min_abs_slope: d.min_abs_slope,
                max_abs_slope: d.max_abs_slope,
                roundtrip_bound: d.roundtrip_bound,
                input_range: [lo, hi],
            };
            super::write_text(
                &out.join("sm_fit_report.json"),
                &serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?,
            )?;
            println!(
                "identify sm: order {}, residual {:.3e}, monotone {} -> {}",
                section.order,
                d.residual_rel,
                d.monotone,
                out.display()
            );
        }
        ModelKind::Assm => {
            let section = cfg
                .assm
                .as_ref()
                .ok_or_else(|| CliError::Config("identify assm needs an `assm` section".into()))?;
            let model = fit_assm_from_plant(
                plant.as_ref(),
                &AssmTrainingSpec {
                    grid: section.grid.clone(),
                    jump_offsets: section.jump_offsets.iter().map(|&o| o as isize).collect(),
                    decay_duration: section.decay_duration,
                    sample_dt: cfg.sample_dt,
                    dt_integration: cfg.dt_integration,
                    fit: LocalFitConfig {
                        embedding: section.embedding,
                        parametrization_order: section.parametrization_order,
                        dynamics_order: section.dynamics_order,
                        transient_trim: section.transient_trim,
                        ..Default::default()
                    },
                    shared_tangent: section.shared_tangent,
                },
            )?;
            super::write_text(&out.join("assm_model.json"), &assm_to_json(&model)?)?;
            let report: Vec<LocalReport> = model
                .locals()
                .iter()
                .map(|l| LocalReport {
                    input_level: l.input_level,
                    parametrization_residual: l.diagnostics.parametrization_residual,
                    parametrization_condition: l.diagnostics.parametrization_condition,
                    dynamics_residual: l.diagnostics.dynamics_residual,
                    dynamics_condition: l.diagnostics.dynamics_condition,
                })
                .collect();
            super::write_text(
                &out.join("assm_fit_report.json"),
                &serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?,
            )?;
            println!(
                "identify assm: {} locals over [{}, {}] -> {}",
                model.locals().len(),
                model.input_range().0,
                model.input_range().1,
                out.display()
            );
        }
    }
    Ok(())
}
