use std::path::{Path, PathBuf};

use ssmred_core::plants::simulate;

use crate::config::{load, select_plant, SimulateConfig};
use crate::error::CliResult;
use crate::svg::{line_chart, Series, PALETTE};

pub fn run(config_path: &Path, out_override: &Option<PathBuf>) -> CliResult<()> {
    let (cfg, base) = load::<SimulateConfig>(config_path)?;
    let out = super::output_dir(&base, &cfg.output_dir, out_override)?;

    let plant_cfg = select_plant(&cfg.plants, &cfg.plant)?;
    let plant = plant_cfg.build()?;
    let decay = match &cfg.decay {
        Some(spec) => Some(spec.build(plant.as_ref())?),
        None => None,
    };
    let input = cfg.input.build(decay.as_ref())?;
    let initial = cfg.initial.build(plant.as_ref())?;

    let trajectory = simulate(plant.as_ref(), &input, &initial, cfg.dt_integration)?;

    let mut names: Vec<String> = plant.state_names();
    names.push("obs".into());
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut csv = Vec::new();
    trajectory.write_csv(&name_refs, &mut csv)?;
    super::write_text(&out.join("trajectory.csv"), std::str::from_utf8(&csv).unwrap())?;

    let obs = trajectory.channel(plant.state_dim())?;
    let points: Vec<(f64, f64)> = (0..obs.len()).map(|j| (obs.time(j), obs.value(j))).collect();
    let input_points: Vec<(f64, f64)> =
        (0..input.len()).map(|j| (input.time(j), input.value(j))).collect();
    let svg = line_chart(
        &format!("{} trajectory", cfg.plant),
        "t [s]",
        "observable / input",
        &[
            Series {
                label: "observable",
                points,
                color: PALETTE[0],
            },
            Series {
                label: "input",
                points: input_points,
                color: PALETTE[4],
            },
        ],
    );
    super::write_text(&out.join("trajectory.svg"), &svg)?;
    println!(
        "simulate: wrote {} samples to {}",
        trajectory.len(),
        out.display()
    );
    Ok(())
}
