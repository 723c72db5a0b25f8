//! Population-convergence ladder over hierarchy depth L and Matsubara count K.

use super::propagate::{propagate, HeomModel, PropagationConfig};
use super::trajectory::{DensityMatrix, Trajectory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceConfig {
    pub start_level: usize,
    pub start_matsubara: usize,
    pub max_level: usize,
    pub max_matsubara: usize,
    /// Maximum absolute population difference accepted between successive
    /// settings.
    pub tol_pop: f64,
    /// Also probe K + 1 once depth has converged.
    pub vary_matsubara: bool,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            start_level: 2,
            start_matsubara: 0,
            max_level: 12,
            max_matsubara: 4,
            tol_pop: 0.01,
            vary_matsubara: true,
        }
    }
}

/// One refinement: the new setting and its population delta against the
/// previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderStep {
    pub level: usize,
    pub matsubara: usize,
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub level: usize,
    pub matsubara: usize,
    pub ladder: Vec<LadderStep>,
    /// Trajectory at the final (most refined) setting.
    pub trajectory: Trajectory,
}

impl ConvergenceReport {
    pub fn last_delta(&self) -> f64 {
        self.ladder.last().map_or(f64::INFINITY, |s| s.delta)
    }

    /// Turns an unconverged report into [`Error::NotConverged`].
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                level: self.level,
                matsubara: self.matsubara,
                delta: self.last_delta(),
            })
        }
    }
}

/// Refines L until successive trajectories agree in every population to
/// within `tol_pop`, then (optionally) checks K + 1 at that depth, returning
/// to depth refinement if K mattered.
///
/// Running out of `max_level`, or hitting the ADO budget, yields an
/// unconverged report rather than an error.
pub fn converge(
    rho0: &DensityMatrix,
    model: &HeomModel,
    base: &PropagationConfig,
    cfg: &ConvergenceConfig,
) -> Result<ConvergenceReport> {
    converge_with(rho0, model, base, cfg, |_| {})
}

/// [`converge`], reporting each ladder step as soon as it is measured.
pub fn converge_with(
    rho0: &DensityMatrix,
    model: &HeomModel,
    base: &PropagationConfig,
    cfg: &ConvergenceConfig,
    mut on_step: impl FnMut(&LadderStep),
) -> Result<ConvergenceReport> {
    if cfg.start_level == 0 || cfg.start_level > cfg.max_level {
        return Err(Error::InvalidParameter(format!(
            "invalid level range {}..={}",
            cfg.start_level, cfg.max_level
        )));
    }
    let run = |level: usize, matsubara: usize| -> Result<Trajectory> {
        let m = model.with_bath(model.bath.with_matsubara(matsubara));
        let c = PropagationConfig {
            truncation_level: level,
            ..*base
        };
        propagate(rho0, &m, &c)
    };

    let (mut level, mut matsubara) = (cfg.start_level, cfg.start_matsubara);
    let mut current = run(level, matsubara)?;
    let mut ladder = Vec::new();

    let unconverged = |level, matsubara, ladder, trajectory| ConvergenceReport {
        converged: false,
        level,
        matsubara,
        ladder,
        trajectory,
    };

    loop {
        if level + 1 > cfg.max_level {
            return Ok(unconverged(level, matsubara, ladder, current));
        }
        let next = match run(level + 1, matsubara) {
            Ok(t) => t,
            Err(Error::Capacity { .. }) => {
                return Ok(unconverged(level, matsubara, ladder, current))
            }
            Err(e) => return Err(e),
        };
        let delta = current.max_population_difference(&next)?;
        level += 1;
        current = next;
        let step = LadderStep {
            level,
            matsubara,
            delta,
        };
        on_step(&step);
        ladder.push(step);
        if delta >= cfg.tol_pop {
            continue;
        }

        if !cfg.vary_matsubara || model.bath.lambda == 0.0 || matsubara + 1 > cfg.max_matsubara {
            break;
        }
        let next = match run(level, matsubara + 1) {
            Ok(t) => t,
            Err(Error::Capacity { .. }) => {
                return Ok(unconverged(level, matsubara, ladder, current))
            }
            Err(e) => return Err(e),
        };
        let delta = current.max_population_difference(&next)?;
        matsubara += 1;
        current = next;
        let step = LadderStep {
            level,
            matsubara,
            delta,
        };
        on_step(&step);
        ladder.push(step);
        if delta < cfg.tol_pop {
            break;
        }
    }

    Ok(ConvergenceReport {
        converged: true,
        level,
        matsubara,
        ladder,
        trajectory: current,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heom::trajectory::site_state;
    use crate::model::{BathSpec, ExcitonHamiltonian};

    fn short_config() -> PropagationConfig {
        PropagationConfig {
            dt: 1.0,
            t_max: 100.0,
            output_stride: 5.0,
            ..Default::default()
        }
    }

    #[test]
    fn zero_coupling_converges_immediately() {
        let model = HeomModel::new(
            ExcitonHamiltonian::fmo(),
            BathSpec::new(0.0, 100.0, 310.0, 0).unwrap(),
        );
        let rho0 = site_state(8, 1).unwrap();
        let report = converge(
            &rho0,
            &model,
            &short_config(),
            &ConvergenceConfig::default(),
        )
        .unwrap();
        assert!(report.converged);
        assert_eq!(report.ladder.len(), 1);
        assert_eq!(report.ladder[0].delta, 0.0);
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let model = HeomModel::new(
            ExcitonHamiltonian::fmo(),
            BathSpec::new(300.0, 25.0, 310.0, 0).unwrap(),
        );
        let rho0 = site_state(8, 1).unwrap();
        let cfg = ConvergenceConfig {
            start_level: 1,
            max_level: 2,
            tol_pop: 1e-12,
            ..Default::default()
        };
        let report = converge(&rho0, &model, &short_config(), &cfg).unwrap();
        assert!(!report.converged);
        assert_eq!(report.ladder.len(), 1);
        assert!(report.ladder.iter().all(|s| s.delta >= 0.0));
        assert!(matches!(
            report.into_result(),
            Err(Error::NotConverged { level: 2, .. })
        ));
    }
}
