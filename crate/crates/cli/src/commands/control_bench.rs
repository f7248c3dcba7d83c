use std::path::{Path, PathBuf};

use ssmred_core::control::{
    benchmark, tune_gains, ClutchConfig, ControlMode, GainGrid, PiConfig, SafetyLimits,
};
use ssmred_core::plants::Plant;
use ssmred_core::reduction::sm_from_json;
use ssmred_core::signals::{gen_slow_input, ramp_in, slowness_rho, SlowInputSpec, TimeSeries};

use crate::config::{load, resolve, select_plant, ControlBenchConfig, ReferenceSection};
use crate::error::{CliError, CliResult};
use crate::svg::{line_chart, Series, PALETTE};

fn build_reference(
    section: &ReferenceSection,
    decay: &ssmred_core::signals::DecayReference<f64>,
    period: f64,
) -> CliResult<TimeSeries<f64>> {
    let amp = section.amplitude_deg.to_radians();
    let raw = gen_slow_input(
        section.seed,
        &SlowInputSpec {
            duration: section.duration,
            dt: period,
            min: -amp,
            max: amp,
            target_rho: section.target_rho,
        },
        decay,
    )?;
    Ok(match section.ramp_in {
        Some(ramp) => ramp_in(&raw, ramp),
        None => raw,
    })
}

pub fn run(config_path: &Path, out_override: &Option<PathBuf>) -> CliResult<()> {
    let (cfg, base) = load::<ControlBenchConfig>(config_path)?;
    let out = super::output_dir(&base, &cfg.output_dir, out_override)?;
    let plant_cfg = select_plant(&cfg.plants, &cfg.plant)?;
    let plant = plant_cfg.build_joint()?;

    let sm_text = std::fs::read_to_string(resolve(&base, &cfg.sm_model))
        .map_err(|e| CliError::Config(format!("cannot read sm model: {e}")))?;
    let sm = sm_from_json::<f64>(&sm_text)?;

    let decay = cfg.decay.build(&plant)?;
    let reference = build_reference(&cfg.reference, &decay, cfg.pi.period)?;
    let calibration = build_reference(&cfg.calibration, &decay, cfg.pi.period)?;
    let reference_rho = slowness_rho(&decay, &reference)?;

    let base_pi = PiConfig {
        kp: 0.0,
        ki: 0.0,
        period: cfg.pi.period,
        ema_alpha: cfg.pi.ema_alpha,
    };
    let limits = SafetyLimits {
        v_min: cfg.limits.v_min,
        v_max: cfg.limits.v_max,
        dv_max: cfg.limits.dv_max,
    };
    let defaults = ClutchConfig::<f64>::default();
    let clutch = ClutchConfig {
        dead_zone: cfg.clutch.dead_zone.unwrap_or(defaults.dead_zone),
        engagement_time: cfg.clutch.engagement_time.unwrap_or(defaults.engagement_time),
        ramp_time: cfg.clutch.ramp_time.unwrap_or(defaults.ramp_time),
        cooldown_time: cfg.clutch.cooldown_time.unwrap_or(defaults.cooldown_time),
    };
    let initial = plant.steady_state(0.0)?;

    let grid = match &cfg.tuning {
        Some(t) => GainGrid {
            kp_range: (t.kp_range[0], t.kp_range[1]),
            ki_range: (t.ki_range[0], t.ki_range[1]),
            points: t.points,
            sweeps: t.sweeps,
        },
        None => GainGrid::default(),
    };
    let resolve_gains = |fixed: &Option<crate::config::GainsSection>,
                             mode: ControlMode|
     -> CliResult<PiConfig<f64>> {
        match fixed {
            Some(g) => Ok(PiConfig {
                kp: g.kp,
                ki: g.ki,
                ..base_pi
            }),
            None => {
                let (tuned, _) = tune_gains(
                    &plant,
                    mode,
                    Some(&sm),
                    &base_pi,
                    &limits,
                    &clutch,
                    &calibration,
                    &grid,
                    cfg.substeps,
                    &initial,
                )?;
                Ok(tuned)
            }
        }
    };
    let gains_ff_fb = resolve_gains(&cfg.gains_ff_fb, ControlMode::FfFb)?;
    let gains_fb_only = resolve_gains(&cfg.gains_fb_only, ControlMode::FbOnly)?;

    let (report, logs) = benchmark(
        &plant,
        &sm,
        &gains_ff_fb,
        &gains_fb_only,
        &base_pi,
        &limits,
        &clutch,
        &reference,
        cfg.seed,
        cfg.substeps,
        &initial,
    )?;

    for log in &logs {
        let mut buf = Vec::new();
        log.write_csv(&mut buf)?;
        super::write_text(
            &out.join(format!("log_{}.csv", log.mode.label())),
            std::str::from_utf8(&buf).unwrap(),
        )?;
    }
    let report_json = serde_json::json!({
        "reference_rho": reference_rho,
        "reference_checksum": report.reference_checksum,
        "seed": report.seed,
        "modes": {
            "ff_fb": report.ff_fb,
            "ff_only": report.ff_only,
            "fb_only": report.fb_only,
        },
    });
    super::write_text(
        &out.join("benchmark_report.json"),
        &serde_json::to_string_pretty(&report_json).map_err(|e| CliError::Config(e.to_string()))?,
    )?;

    let deg = 180.0 / std::f64::consts::PI;
    let mut series = vec![Series {
        label: "reference",
        points: (0..reference.len())
            .map(|j| (reference.time(j), reference.value(j) * deg))
            .collect(),
        color: "#333333",
    }];
    for (log, color) in logs.iter().zip([PALETTE[0], PALETTE[1], PALETTE[2]]) {
        series.push(Series {
            label: log.mode.label(),
            points: log.rows.iter().map(|r| (r.t, r.theta_meas * deg)).collect(),
            color,
        });
    }
    let svg = line_chart(
        &format!(
            "tracking: rms {:.2} / {:.2} / {:.2} deg (combined / ff / fb)",
            report.ff_fb.rms_error_deg, report.ff_only.rms_error_deg, report.fb_only.rms_error_deg
        ),
        "t [s]",
        "joint angle [deg]",
        &series,
    );
    super::write_text(&out.join("overlay.svg"), &svg)?;

    println!(
        "control-bench: rms {:.3} / {:.3} / {:.3} deg -> {}",
        report.ff_fb.rms_error_deg,
        report.ff_only.rms_error_deg,
        report.fb_only.rms_error_deg,
        out.display()
    );
    Ok(())
}
