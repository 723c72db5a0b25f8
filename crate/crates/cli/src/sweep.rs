//! Parameter sweeps: one independent run per manifest entry, an aggregate
//! table in manifest order, and per-run failure isolation.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use heom_core::data::{fmt_f64, SweepManifest, SweepPoint};
use heom_core::heom::{converge, propagate, site_state, HeomModel, Trajectory};
use heom_core::measures::{default_pairs, trajectory_measures, MeasureSeries};
use heom_core::model::{efficiency_parameter, BathSpec, ExcitonHamiltonian};
use heom_core::{Error, UnitSystem};

use crate::commands::{create_dir, write_run, LadderArgs};
use crate::config::RunConfig;
use crate::CliError;

/// Sample times of the aggregate table, fs.
pub const AGGREGATE_TIMES_FS: [f64; 4] = [100.0, 500.0, 1000.0, 2000.0];

pub const AGGREGATE_FILE: &str = "aggregate.txt";
pub const FAILURES_FILE: &str = "failures.txt";

pub struct SweepOptions {
    /// Converge each point with these settings instead of using L and K.
    pub converge: Option<LadderArgs>,
    pub write_trajectories: bool,
}

pub fn aggregate_columns() -> Vec<String> {
    let mut cols: Vec<String> = [
        "run_id",
        "lambda",
        "gamma",
        "T",
        "ln_gamma_over_lambda",
        "ln_gamma_beta",
        "ln_Lambda",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for prefix in ["E", "L_rho"] {
        for t in AGGREGATE_TIMES_FS {
            cols.push(format!("{prefix}_{}ps", t / 1000.0));
        }
    }
    cols.push("L".into());
    cols.push("K".into());
    cols
}

/// Value of `series` at `t_fs`, or NaN when the run did not reach it.
fn sample(m: &MeasureSeries, series: &[f64], t_fs: f64) -> f64 {
    match m.nearest_index(t_fs) {
        Some(i) if (m.times[i] - t_fs).abs() <= 1e-6 * t_fs.max(1.0) => series[i],
        _ => f64::NAN,
    }
}

struct RunOutcome {
    trajectory: Trajectory,
    measures: MeasureSeries,
    level: usize,
    matsubara: usize,
}

fn run_point(
    point: &SweepPoint,
    h: &ExcitonHamiltonian,
    site: usize,
    config: &RunConfig,
    options: &SweepOptions,
) -> Result<RunOutcome, Error> {
    let bath = BathSpec::new(
        point.lambda,
        point.gamma,
        point.temperature,
        config.matsubara,
    )?;
    let model = HeomModel::new(h.clone(), bath);
    let rho0 = site_state(h.n_sites(), site)?;
    let (trajectory, level, matsubara) = match &options.converge {
        Some(ladder) => {
            let report = converge(&rho0, &model, &config.propagation(), &ladder.ladder(config))?
                .into_result()?;
            (report.trajectory, report.level, report.matsubara)
        }
        None => (
            propagate(&rho0, &model, &config.propagation())?,
            config.level,
            config.matsubara,
        ),
    };
    let measures = trajectory_measures(&trajectory, &default_pairs())?;
    Ok(RunOutcome {
        trajectory,
        measures,
        level,
        matsubara,
    })
}

fn aggregate_row(
    point: &SweepPoint,
    outcome: &RunOutcome,
    g: f64,
    units: &UnitSystem,
) -> Result<String, Error> {
    let bath = BathSpec::new(
        point.lambda,
        point.gamma,
        point.temperature,
        outcome.matsubara,
    )?;
    let eff = efficiency_parameter(&bath, g, units)?;
    let m = &outcome.measures;
    let mut fields = vec![
        point.run_id.clone(),
        fmt_f64(point.lambda),
        fmt_f64(point.gamma),
        fmt_f64(point.temperature),
        fmt_f64(eff.ln_gamma_over_lambda),
        fmt_f64(eff.ln_gamma_beta),
        fmt_f64(eff.ln_value),
    ];
    for t in AGGREGATE_TIMES_FS {
        fields.push(fmt_f64(sample(m, &m.global_entanglement, t)));
    }
    for t in AGGREGATE_TIMES_FS {
        fields.push(fmt_f64(sample(m, &m.coherence_length, t)));
    }
    fields.push(outcome.level.to_string());
    fields.push(outcome.matsubara.to_string());
    Ok(fields.join(" "))
}

pub fn sweep(
    config: &RunConfig,
    manifest_path: &Path,
    options: &SweepOptions,
) -> Result<(), CliError> {
    let manifest = SweepManifest::read(manifest_path)?;
    let h = config.hamiltonian()?;
    if manifest.initial_site == 0 || manifest.initial_site > h.n_sites() {
        return Err(CliError::usage(format!(
            "manifest initial site {} is out of range for {} sites",
            manifest.initial_site,
            h.n_sites()
        )));
    }
    let out = &config.out_dir;
    create_dir(&out.join("runs"))?;
    manifest.write(&out.join("manifest.txt"))?;
    fs::write(out.join("config.toml"), config.to_text()).map_err(Error::from)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start worker pool: {e}")))?;
    let units = UnitSystem::default();
    let g = h.average_energy_gap();

    eprintln!(
        "sweep: {} runs on {} workers",
        manifest.len(),
        config.workers
    );
    // Results come back in manifest order whatever order runs finish in.
    let results: Vec<Result<String, Error>> = pool.install(|| {
        manifest
            .runs
            .par_iter()
            .map(|point| {
                let mut run_config = config.clone();
                run_config.lambda = point.lambda;
                run_config.gamma = point.gamma;
                run_config.temperature = point.temperature;
                run_config.site = manifest.initial_site;
                let dir = out.join("runs").join(&point.run_id);
                run_config.out_dir = dir.clone();
                let result =
                    run_point(point, &h, manifest.initial_site, config, options).and_then(|o| {
                        run_config.level = o.level;
                        run_config.matsubara = o.matsubara;
                        write_run(
                            &dir,
                            &run_config,
                            &o.trajectory,
                            &o.measures,
                            options.write_trajectories,
                        )?;
                        aggregate_row(point, &o, g, &units)
                    });
                match &result {
                    Ok(_) => eprintln!("  {} done", point.run_id),
                    Err(e) => eprintln!("  {} failed: {e}", point.run_id),
                }
                result
            })
            .collect()
    });

    let mut table = format!(
        "# heom-aggregate v1\n# manifest = {}\n",
        manifest_path.display()
    );
    table.push_str(&aggregate_columns().join(" "));
    table.push('\n');
    let mut failures = String::from("run_id error\n");
    let mut n_failed = 0;
    for (point, result) in manifest.runs.iter().zip(&results) {
        match result {
            Ok(row) => {
                table.push_str(row);
                table.push('\n');
            }
            Err(e) => {
                n_failed += 1;
                failures.push_str(&format!(
                    "{} {}\n",
                    point.run_id,
                    e.to_string().replace('\n', " ")
                ));
            }
        }
    }
    fs::write(out.join(AGGREGATE_FILE), table).map_err(Error::from)?;
    fs::write(out.join(FAILURES_FILE), &failures).map_err(Error::from)?;

    println!(
        "{} of {} runs succeeded -> {}",
        manifest.len() - n_failed,
        manifest.len(),
        out.join(AGGREGATE_FILE).display()
    );
    if n_failed > 0 {
        println!("failed runs:");
        for line in failures.lines().skip(1) {
            println!("  {line}");
        }
    }
    Ok(())
}
