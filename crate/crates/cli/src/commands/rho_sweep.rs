//! Slowness sweep: for each target, generate an input, simulate the
//! truth, predict with both reduced models and report the trajectory
//! errors. Independent targets run in parallel, capped by SSMRED_THREADS.

use std::path::{Path, PathBuf};

use ssmred_core::pipeline::record_forced_response;
use ssmred_core::reduction::{assm_from_json, predict_assm, sm_from_json};
use ssmred_core::signals::{nmte, slowness_rho, TimeSeries};

use crate::config::{load, resolve, select_plant, RhoSweepConfig};
use crate::error::{CliError, CliResult};
use crate::svg::{line_chart, Series, PALETTE};

struct SweepRow {
    target: f64,
    achieved: f64,
    nmte_sm: f64,
    nmte_assm: f64,
    input: TimeSeries<f64>,
    truth: TimeSeries<f64>,
    sm_pred: TimeSeries<f64>,
    assm_pred: TimeSeries<f64>,
}

fn thread_cap() -> CliResult<usize> {
    match std::env::var("SSMRED_THREADS") {
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Config(format!("SSMRED_THREADS must be a positive integer, got `{v}`"))),
    }
}

pub fn run(config_path: &Path, out_override: &Option<PathBuf>) -> CliResult<()> {
    let (cfg, base) = load::<RhoSweepConfig>(config_path)?;
    if cfg.rho_targets.is_empty() {
        return Err(CliError::Config("rho_targets must not be empty".into()));
    }
    if let Some(seeds) = &cfg.seeds {
        if seeds.len() != cfg.rho_targets.len() {
            return Err(CliError::Config("seeds must match rho_targets in length".into()));
        }
    }
    let cap = thread_cap()?;
    let out = super::output_dir(&base, &cfg.output_dir, out_override)?;
    let plant_cfg = select_plant(&cfg.plants, &cfg.plant)?;

    let sm_text = std::fs::read_to_string(resolve(&base, &cfg.sm_model))
        .map_err(|e| CliError::Config(format!("cannot read sm model: {e}")))?;
    let sm = sm_from_json::<f64>(&sm_text)?;
    let assm_text = std::fs::read_to_string(resolve(&base, &cfg.assm_model))
        .map_err(|e| CliError::Config(format!("cannot read assm model: {e}")))?;
    let assm = assm_from_json::<f64>(&assm_text)?;

    let jobs: Vec<(usize, f64, u64)> = cfg
        .rho_targets
        .iter()
        .enumerate()
        .map(|(i, &rho)| {
            let seed = match &cfg.seeds {
                Some(s) => s[i],
                None => cfg.seed_base + i as u64,
            };
            (i, rho, seed)
        })
        .collect();

    let mut rows: Vec<Option<CliResult<SweepRow>>> = Vec::new();
    rows.resize_with(jobs.len(), || None);
    for chunk in jobs.chunks(cap) {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for &(index, target, seed) in chunk {
                let sm = &sm;
                let assm = &assm;
                let cfg = &cfg;
                let plant_cfg = &plant_cfg;
                handles.push((
                    index,
                    scope.spawn(move || -> CliResult<SweepRow> {
                        // plants are cheap to rebuild and this keeps the
                        // jobs fully independent
                        let plant = plant_cfg.build()?;
                        let decay = cfg.decay.build(plant.as_ref())?;
                        let (input, truth) = record_forced_response(
                            plant.as_ref(),
                            seed,
                            cfg.duration,
                            cfg.sample_dt,
                            cfg.dt_integration,
                            (cfg.range[0], cfg.range[1]),
                            target,
                            &decay,
                        )?;
                        let achieved = slowness_rho(&decay, &input)?;
                        let (sm_pred, _) = sm.predict(&input)?;
                        let window: Vec<f64> =
                            truth.values()[..assm.embedding().required_window()].to_vec();
                        let assm_pred =
                            predict_assm(assm, &input, &window, cfg.substeps, cfg.transport)?;
                        Ok(SweepRow {
                            target,
                            achieved,
                            nmte_sm: nmte(&truth, &sm_pred)?,
                            nmte_assm: nmte(&truth, &assm_pred)?,
                            input,
                            truth,
                            sm_pred,
                            assm_pred,
                        })
                    }),
                ));
            }
            for (index, handle) in handles {
                rows[index] = Some(handle.join().expect("sweep worker panicked"));
            }
        });
    }

    let mut table = String::from("rho_target,rho_achieved,nmte_sm,nmte_assm\n");
    for (i, slot) in rows.into_iter().enumerate() {
        let row = slot.expect("all jobs ran")?;
        table.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            row.target, row.achieved, row.nmte_sm, row.nmte_assm
        ));
        let to_points = |s: &TimeSeries<f64>| -> Vec<(f64, f64)> {
            (0..s.len()).map(|j| (s.time(j), s.value(j))).collect()
        };
        let svg = line_chart(
            &format!(
                "rho = {:.3}: NMTE sm {:.3}, family {:.3}",
                row.achieved, row.nmte_sm, row.nmte_assm
            ),
            "t [s]",
            "observable",
            &[
                Series {
                    label: "truth",
                    points: to_points(&row.truth),
                    color: "#333333",
                },
                Series {
                    label: "slow manifold",
                    points: to_points(&row.sm_pred),
                    color: PALETTE[1],
                },
                Series {
                    label: "adiabatic family",
                    points: to_points(&row.assm_pred),
                    color: PALETTE[2],
                },
                Series {
                    label: "input (scaled)",
                    points: {
                        let max_in = row
                            .input
                            .values()
                            .iter()
                            .fold(0.0f64, |a, &b| a.max(b.abs()))
                            .max(1e-12);
                        let max_obs = row
                            .truth
                            .values()
                            .iter()
                            .fold(0.0f64, |a, &b| a.max(b.abs()));
                        to_points(&row.input)
                            .into_iter()
                            .map(|(t, v)| (t, v / max_in * max_obs))
                            .collect()
                    },
                    color: "#bbbbbb",
                },
            ],
        );
        super::write_text(&out.join(format!("overlay_rho_{i}.svg")), &svg)?;
    }
    super::write_text(&out.join("nmte_table.csv"), &table)?;
    println!("rho-sweep: wrote nmte_table.csv and overlays to {}", out.display());
    Ok(())
}
