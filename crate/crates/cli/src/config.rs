use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use heom_core::heom::{PropagationConfig, DEFAULT_ADO_BUDGET};
use heom_core::model::{BathSpec, ExcitonHamiltonian, FMO_MODEL_NAME};

use crate::CliError;

/// Environment variable holding the default sweep worker count.
pub const WORKERS_ENV: &str = "HEOM_WORKERS";

/// Everything a run needs. Stored as `key = value` lines; see
/// [`RunConfig::to_text`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Built-in model name or path to a Hamiltonian file.
    pub model: String,
    pub lambda: f64,
    pub gamma: f64,
    pub temperature: f64,
    pub matsubara: usize,
    pub dt: f64,
    pub t_max: f64,
    pub stride: f64,
    pub level: usize,
    pub site: usize,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub ado_budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PropagationConfig::default();
        RunConfig {
            model: FMO_MODEL_NAME.to_string(),
            lambda: 40.0,
            gamma: 100.0,
            temperature: 310.0,
            matsubara: 0,
            dt: p.dt,
            t_max: p.t_max,
            stride: p.output_stride,
            level: p.truncation_level,
            site: 1,
            out_dir: PathBuf::from("heom-out"),
            workers: default_workers(),
            ado_budget: DEFAULT_ADO_BUDGET,
        }
    }
}

fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

impl RunConfig {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn bath(&self) -> Result<BathSpec, CliError> {
        BathSpec::new(self.lambda, self.gamma, self.temperature, self.matsubara)
            .map_err(CliError::from_usage)
    }

    pub fn propagation(&self) -> PropagationConfig {
        PropagationConfig {
            dt: self.dt,
            t_max: self.t_max,
            output_stride: self.stride,
            truncation_level: self.level,
            ado_budget: self.ado_budget,
            ..Default::default()
        }
    }

    /// Loads the Hamiltonian and checks the initial site against it.
    pub fn hamiltonian(&self) -> Result<ExcitonHamiltonian, CliError> {
        let h = ExcitonHamiltonian::load(&self.model).map_err(CliError::from_usage)?;
        if self.site == 0 || self.site > h.n_sites() {
            return Err(CliError::usage(format!(
                "initial site {} is out of range for {} ({} sites)",
                self.site,
                self.model,
                h.n_sites()
            )));
        }
        Ok(h)
    }
}

/// Flags shared by the commands that run simulations. Every flag overrides
/// the corresponding configuration-file value.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Built-in model (`fmo8`) or Hamiltonian file.
    #[arg(long)]
    pub model: Option<String>,
    /// Reorganization energy, cm^-1.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Cut-off frequency, cm^-1.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Temperature, K.
    #[arg(long = "temp", visible_alias = "temperature")]
    pub temperature: Option<f64>,
    /// Number of Matsubara terms K.
    #[arg(long)]
    pub matsubara: Option<usize>,
    /// Integrator step, fs.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Propagation horizon, fs.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Output stride, fs.
    #[arg(long)]
    pub stride: Option<f64>,
    /// Hierarchy truncation level L.
    #[arg(long)]
    pub level: Option<usize>,
    /// Initially excited site (1-based).
    #[arg(long)]
    pub site: Option<usize>,
    /// Output directory.
    #[arg(long = "out", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Parallel workers (default from HEOM_WORKERS, else all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Maximum number of auxiliary density operators.
    #[arg(long)]
    pub ado_budget: Option<usize>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::read(path)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field {
                    c.$field = v.clone();
                })*
            };
        }
        take!(
            model,
            lambda,
            gamma,
            temperature,
            matsubara,
            dt,
            t_max,
            stride,
            level,
            site,
            out_dir,
            workers,
            ado_budget
        );
        if c.workers == 0 {
            return Err(CliError::usage("workers must be at least 1"));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let c = RunConfig {
            lambda: 70.0,
            site: 3,
            out_dir: "some/dir".into(),
            ..Default::default()
        };
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn partial_files_fill_defaults() {
        let c = RunConfig::parse("lambda = 10.0\ntemperature = 77.0\n").unwrap();
        assert_eq!(c.lambda, 10.0);
        assert_eq!(c.temperature, 77.0);
        assert_eq!(c.gamma, RunConfig::default().gamma);
        assert!(RunConfig::parse("lamda = 10.0").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "lambda = 10.0\ngamma = 50.0\n").unwrap();
        let args = RunArgs {
            config: Some(path),
            lambda: Some(20.0),
            ..Default::default()
        };
        let c = args.resolve().unwrap();
        assert_eq!((c.lambda, c.gamma), (20.0, 50.0));
    }
}
