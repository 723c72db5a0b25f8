use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::BathSpec;

pub type DensityMatrix = DMatrix<Complex64>;

/// Trace tolerance for internally generated trajectories.
pub const TRACE_TOL: f64 = 1e-8;
/// Hermiticity tolerance (max |ρ − ρ†|) for internally generated trajectories.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Populations below −this value signal an unconverged hierarchy.
pub const NEGATIVE_POPULATION_TOL: f64 = 1e-8;

/// `|site⟩⟨site|` for a 1-based site index.
pub fn site_state(n_sites: usize, site: usize) -> Result<DensityMatrix> {
    if site == 0 || site > n_sites {
        return Err(Error::InvalidParameter(format!(
            "initial site {site} out of range 1..={n_sites}"
        )));
    }
    let mut rho = DensityMatrix::zeros(n_sites, n_sites);
    rho[(site - 1, site - 1)] = Complex64::new(1.0, 0.0);
    Ok(rho)
}

pub fn trace(rho: &DensityMatrix) -> Complex64 {
    rho.diagonal().iter().sum()
}

/// max over elements of |ρ − ρ†|.
pub fn hermiticity_defect(rho: &DensityMatrix) -> f64 {
    let n = rho.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Parameters a trajectory was produced with. Fields that an external
/// dataset may not record are optional.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub n_sites: usize,
    pub bath: Option<BathSpec>,
    pub truncation_level: Option<usize>,
    pub dt_fs: Option<f64>,
    pub stride_fs: f64,
    pub initial_site: Option<usize>,
    pub hamiltonian_checksum: Option<String>,
}

impl TrajectoryMeta {
    pub fn bare(n_sites: usize, stride_fs: f64) -> Self {
        TrajectoryMeta {
            n_sites,
            bath: None,
            truncation_level: None,
            dt_fs: None,
            stride_fs,
            initial_site: None,
            hamiltonian_checksum: None,
        }
    }
}

/// Worst-case invariant violations over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub max_trace_drift: f64,
    pub max_hermiticity_defect: f64,
    pub min_population: f64,
    pub max_population_imag: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.meta.n_sites
    }

    pub fn t_max(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Population of a 1-based site over time.
    pub fn population(&self, site: usize) -> Vec<f64> {
        self.states
            .iter()
            .map(|r| r[(site - 1, site - 1)].re)
            .collect()
    }

    /// Index of the output sample closest to `t_fs`.
    pub fn nearest_index(&self, t_fs: f64) -> Option<usize> {
        let pos = self.times.partition_point(|&t| t < t_fs);
        match (pos.checked_sub(1), self.times.get(pos)) {
            (None, None) => None,
            (None, Some(_)) => Some(pos),
            (Some(prev), None) => Some(prev),
            (Some(prev), Some(&next)) => {
                if (next - t_fs).abs() < (t_fs - self.times[prev]).abs() {
                    Some(pos)
                } else {
                    Some(prev)
                }
            }
        }
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let mut d = Diagnostics {
            max_trace_drift: 0.0,
            max_hermiticity_defect: 0.0,
            min_population: f64::INFINITY,
            max_population_imag: 0.0,
        };
        for rho in &self.states {
            d.max_trace_drift = d.max_trace_drift.max((trace(rho) - 1.0).norm());
            d.max_hermiticity_defect = d.max_hermiticity_defect.max(hermiticity_defect(rho));
            for p in rho.diagonal().iter() {
                d.min_population = d.min_population.min(p.re);
                d.max_population_imag = d.max_population_imag.max(p.im.abs());
            }
        }
        d
    }

    /// Checks trace and Hermiticity of every state against `tol_trace` and
    /// `tol_hermitian`; reports the first offending time index.
    pub fn check_invariants(&self, tol_trace: f64, tol_hermitian: f64) -> Result<()> {
        for (i, rho) in self.states.iter().enumerate() {
            if rho.nrows() != self.meta.n_sites || rho.ncols() != self.meta.n_sites {
                return Err(Error::InvalidState {
                    reason: format!(
                        "state is {}x{}, expected {}",
                        rho.nrows(),
                        rho.ncols(),
                        self.meta.n_sites
                    ),
                    at_index: Some(i),
                });
            }
            let drift = (trace(rho) - 1.0).norm();
            if !(drift <= tol_trace) {
                return Err(Error::InvalidState {
                    reason: format!("trace deviates from 1 by {drift:e}"),
                    at_index: Some(i),
                });
            }
            let defect = hermiticity_defect(rho);
            if !(defect <= tol_hermitian) {
                return Err(Error::InvalidState {
                    reason: format!("Hermiticity defect {defect:e}"),
                    at_index: Some(i),
                });
            }
        }
        Ok(())
    }

    /// Largest |p_n(t) − p'_n(t)| over sites and times. Both trajectories
    /// must share the output grid.
    pub fn max_population_difference(&self, other: &Trajectory) -> Result<f64> {
        if self.len() != other.len() || self.n_sites() != other.n_sites() {
            return Err(Error::InvalidParameter(
                "trajectories have different grids or sizes".into(),
            ));
        }
        let mut worst = 0.0f64;
        for (a, b) in self.states.iter().zip(&other.states) {
            for i in 0..self.n_sites() {
                worst = worst.max((a[(i, i)].re - b[(i, i)].re).abs());
            }
        }
        Ok(worst)
    }
}
