use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;

use heom_core::data::{
    import_external, read_subset, read_trajectory, sweep_manifest, verify_hamiltonian,
    write_measures, write_trajectory, LayoutConfig, SubsetRule, SweepGrids,
};
use heom_core::heom::{
    converge_with, propagate, site_state, ConvergenceConfig, HeomModel, Trajectory,
    NEGATIVE_POPULATION_TOL,
};
use heom_core::measures::{
    default_pairs, density_snapshot, trajectory_measures, MeasureSeries, SitePair,
    SNAPSHOT_THRESHOLD,
};
use heom_core::model::{efficiency_parameter, ExcitonHamiltonian};
use heom_core::validation::{Validator, ALL_CHECKS};
use heom_core::{Error, UnitSystem};

use crate::config::RunConfig;
use crate::{CliError, EXIT_NOT_CONVERGED, EXIT_VALIDATION};

pub const TRAJECTORY_FILE: &str = "trajectory.txt";
pub const MEASURES_FILE: &str = "measures.txt";
pub const CONFIG_FILE: &str = "config.toml";

pub fn parse_pairs(specs: &[String]) -> Result<Vec<SitePair>, CliError> {
    if specs.is_empty() {
        return Ok(default_pairs());
    }
    specs
        .iter()
        .map(|s| s.parse().map_err(CliError::from_usage))
        .collect()
}

fn check_pairs(pairs: &[SitePair], n_sites: usize) -> Result<(), CliError> {
    for p in pairs {
        if p.second() > n_sites {
            return Err(CliError::usage(format!(
                "pair {},{} is out of range for {n_sites} sites",
                p.first(),
                p.second()
            )));
        }
    }
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::usage(format!("{}: {e}", path.display()))
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

/// Writes trajectory (optional), measures and a copy of the configuration
/// into `dir`.
pub fn write_run(
    dir: &Path,
    config: &RunConfig,
    traj: &Trajectory,
    measures: &MeasureSeries,
    with_trajectory: bool,
) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    if with_trajectory {
        write_trajectory(traj, &dir.join(TRAJECTORY_FILE))?;
    }
    write_measures(measures, &traj.meta, &dir.join(MEASURES_FILE))?;
    fs::write(dir.join(CONFIG_FILE), config.to_text())?;
    Ok(())
}

fn warn_negative_populations(traj: &Trajectory) {
    let d = traj.diagnostics();
    if d.min_population < -NEGATIVE_POPULATION_TOL {
        eprintln!(
            "warning: population reached {:.2e}; the hierarchy is probably not converged (raise --level or --matsubara)",
            d.min_population
        );
    }
}

fn print_summary(
    config: &RunConfig,
    h: &ExcitonHamiltonian,
    traj: &Trajectory,
    m: Option<&MeasureSeries>,
) {
    let units = UnitSystem::default();
    let last = traj.states.last().expect("trajectories are never empty");
    let pops: Vec<String> = (0..traj.n_sites())
        .map(|i| format!("{:.4}", last[(i, i)].re))
        .collect();
    println!("final time (fs)      {}", traj.t_max());
    println!("final populations    {}", pops.join(" "));
    if let Some(m) = m {
        let max_e = m.global_entanglement.iter().cloned().fold(0.0, f64::max);
        println!("max E                {max_e:.6}");
        println!(
            "final L_rho          {:.6}",
            m.coherence_length.last().copied().unwrap_or(f64::NAN)
        );
    }
    if config.lambda == 0.0 {
        println!("unitary limit        lambda = 0, bath decoupled");
    }
    if let Ok(bath) = config.bath() {
        match efficiency_parameter(&bath, h.average_energy_gap(), &units) {
            Ok(eff) => {
                println!("Lambda               {:.4}", eff.value);
                println!("ln(gamma/lambda)     {:.4}", eff.ln_gamma_over_lambda);
                println!("ln(gamma*beta)       {:.4}", eff.ln_gamma_beta);
            }
            Err(e) => println!("Lambda               undefined ({e})"),
        }
    }
}

pub fn simulate(config: &RunConfig, pair_specs: &[String]) -> Result<(), CliError> {
    let h = config.hamiltonian()?;
    let pairs = parse_pairs(pair_specs)?;
    check_pairs(&pairs, h.n_sites())?;
    let bath = config.bath()?;
    let rho0 = site_state(h.n_sites(), config.site)?;
    let model = HeomModel::new(h.clone(), bath);
    let traj = propagate(&rho0, &model, &config.propagation())?;
    warn_negative_populations(&traj);
    match trajectory_measures(&traj, &pairs) {
        Ok(measures) => {
            write_run(&config.out_dir, config, &traj, &measures, true)?;
            print_summary(config, &h, &traj, Some(&measures));
            println!("written to           {}", config.out_dir.display());
            Ok(())
        }
        Err(e @ Error::InvalidState { .. }) => {
            // Keep the trajectory: it is still useful and can be re-measured.
            fs::create_dir_all(&config.out_dir).map_err(Error::from)?;
            write_trajectory(&traj, &config.out_dir.join(TRAJECTORY_FILE))?;
            fs::write(config.out_dir.join(CONFIG_FILE), config.to_text()).map_err(Error::from)?;
            print_summary(config, &h, &traj, None);
            println!(
                "written to           {} (trajectory only)",
                config.out_dir.display()
            );
            Err(CliError::usage(format!(
                "measures rejected the propagated state: {e}; \
                 with a pure initial state and weak or no bath, RK4 phase error shows up as small negative \
                 eigenvalues, so rerun with a smaller --dt (or a deeper hierarchy if the bath is strong)"
            )))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Args)]
pub struct LadderArgs {
    /// Population tolerance between successive settings.
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    /// Deepest hierarchy level to try.
    #[arg(long, default_value_t = 12)]
    pub max_level: usize,
    /// Largest Matsubara count to try.
    #[arg(long, default_value_t = 4)]
    pub max_matsubara: usize,
    /// Keep K fixed at its configured value.
    #[arg(long)]
    pub fixed_matsubara: bool,
}

impl LadderArgs {
    pub fn ladder(&self, config: &RunConfig) -> ConvergenceConfig {
        ConvergenceConfig {
            start_level: config.level,
            start_matsubara: config.matsubara,
            max_level: self.max_level,
            max_matsubara: self.max_matsubara,
            tol_pop: self.tol,
            vary_matsubara: !self.fixed_matsubara,
        }
    }
}

pub fn converge(config: &RunConfig, args: &LadderArgs) -> Result<(), CliError> {
    let h = config.hamiltonian()?;
    let bath = config.bath()?;
    let rho0 = site_state(h.n_sites(), config.site)?;
    let model = HeomModel::new(h.clone(), bath);
    println!("{:>3} {:>3} {:>12}", "L", "K", "delta");
    let report = converge_with(
        &rho0,
        &model,
        &config.propagation(),
        &args.ladder(config),
        |s| println!("{:>3} {:>3} {:>12.6e}", s.level, s.matsubara, s.delta),
    )
    .map_err(|e| match e {
        Error::Capacity { .. } => CliError {
            code: EXIT_NOT_CONVERGED,
            message: e.to_string(),
        },
        e => e.into(),
    })?;

    let mut final_config = config.clone();
    final_config.level = report.level;
    final_config.matsubara = report.matsubara;
    let measures = trajectory_measures(&report.trajectory, &default_pairs())?;
    write_run(
        &config.out_dir,
        &final_config,
        &report.trajectory,
        &measures,
        true,
    )?;
    let table: String = report
        .ladder
        .iter()
        .map(|s| format!("{} {} {}\n", s.level, s.matsubara, s.delta))
        .collect();
    let ladder_path = config.out_dir.join("ladder.txt");
    fs::write(&ladder_path, format!("L K delta\n{table}"))
        .map_err(|e| io_error(&ladder_path, e))?;

    if report.converged {
        println!(
            "converged at L = {}, K = {}",
            report.level, report.matsubara
        );
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_NOT_CONVERGED,
            message: format!(
                "not converged: stopped at L = {}, K = {} with last delta {:e} (tolerance {})",
                report.level,
                report.matsubara,
                report.last_delta(),
                args.tol
            ),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    /// Trajectory file.
    pub trajectory: PathBuf,
    /// Concurrence pairs, e.g. `3,4 3,7 2,3` (default 1,2 1,3 3,4).
    #[arg(long, num_args = 1..)]
    pub pairs: Vec<String>,
    /// Output file (default: `<input stem>.measures.txt` beside the input).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also print the density-matrix magnitudes at this time (fs).
    #[arg(long, value_name = "T_FS")]
    pub snapshot: Option<f64>,
    /// Snapshot display threshold.
    #[arg(long, default_value_t = SNAPSHOT_THRESHOLD)]
    pub threshold: f64,
    /// Check the trajectory header against this model's checksum.
    #[arg(long)]
    pub model: Option<String>,
    /// Column layout of an external table, e.g. `t,p1,p2,re1_2,im1_2`.
    #[arg(long)]
    pub layout: Option<String>,
    /// Number of sites in an external table.
    #[arg(long, default_value_t = 8)]
    pub sites: usize,
    /// Multiplier taking the external time column to fs.
    #[arg(long, default_value_t = 1.0)]
    pub time_scale: f64,
    /// Header lines to skip in an external table.
    #[arg(long, default_value_t = 0)]
    pub header_lines: usize,
    /// Field delimiter of an external table (default: whitespace or comma).
    #[arg(long)]
    pub delimiter: Option<char>,
}

pub fn measure(args: &MeasureArgs) -> Result<(), CliError> {
    let traj = match &args.layout {
        Some(spec) => {
            let mut layout = LayoutConfig::parse(args.sites, spec)?;
            layout.time_scale = args.time_scale;
            layout.header_lines = args.header_lines;
            layout.delimiter = args.delimiter;
            import_external(&args.trajectory, &layout)?
        }
        None => read_trajectory(&args.trajectory)?,
    };
    if let Some(model) = &args.model {
        let h = ExcitonHamiltonian::load(model)?;
        verify_hamiltonian(&traj, &h, &args.trajectory)?;
    }
    let pairs = parse_pairs(&args.pairs)?;
    check_pairs(&pairs, traj.n_sites())?;
    let measures = trajectory_measures(&traj, &pairs)?;
    let out = args.out.clone().unwrap_or_else(|| {
        let stem = args
            .trajectory
            .file_stem()
            .map_or_else(|| "trajectory".into(), |s| s.to_string_lossy().into_owned());
        args.trajectory
            .with_file_name(format!("{stem}.measures.txt"))
    });
    write_measures(&measures, &traj.meta, &out)?;
    println!(
        "{} rows, {} concurrence columns -> {}",
        measures.len(),
        pairs.len(),
        out.display()
    );
    if let Some(t) = args.snapshot {
        let snap = density_snapshot(&traj, t, args.threshold)?;
        print!("{}", snap.to_table());
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct ManifestArgs {
    /// Output manifest file.
    #[arg(long)]
    pub out: PathBuf,
    /// Explicit `lambda gamma T` triples, one per line.
    #[arg(long, value_name = "FILE")]
    pub subset: Option<PathBuf>,
    /// Reorganization energies (default 10 to 520 step 30).
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Vec<f64>,
    /// Cut-off frequencies (default 25 to 500 step 25).
    #[arg(long, value_delimiter = ',')]
    pub gamma_grid: Vec<f64>,
    /// Temperatures (default 30 to 510 step 20).
    #[arg(long, value_delimiter = ',')]
    pub temp_grid: Vec<f64>,
    /// Initially excited site for every run.
    #[arg(long, default_value_t = 1)]
    pub site: usize,
}

pub fn manifest(args: &ManifestArgs) -> Result<(), CliError> {
    let mut grids = SweepGrids::default();
    for (flag, grid) in [
        (&args.lambda_grid, &mut grids.lambda),
        (&args.gamma_grid, &mut grids.gamma),
        (&args.temp_grid, &mut grids.temperature),
    ] {
        if !flag.is_empty() {
            *grid = flag.clone();
        }
    }
    let rule = match &args.subset {
        Some(path) => SubsetRule::Explicit(read_subset(path)?),
        None => SubsetRule::Full,
    };
    let m = sweep_manifest(grids, &rule, args.site)?;
    m.write(&args.out)?;
    println!("{} runs -> {}", m.len(), args.out.display());
    Ok(())
}

pub fn validate(only: &[u8]) -> Result<(), CliError> {
    let ids: Vec<u8> = if only.is_empty() {
        ALL_CHECKS.to_vec()
    } else {
        if let Some(bad) = only.iter().find(|id| !ALL_CHECKS.contains(id)) {
            return Err(CliError::usage(format!("no check numbered {bad}")));
        }
        ALL_CHECKS
            .iter()
            .copied()
            .filter(|id| only.contains(id))
            .collect()
    };
    let mut validator = Validator::new().with_log(|m| eprintln!("{m}"));
    let results = validator.run_all(&ids, |r| println!("{}", r.line()));
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{} ({})", r.id, r.title))
        .collect();
    if failed.is_empty() {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_VALIDATION,
            message: format!("failed checks: {}", failed.join(", ")),
        })
    }
}
