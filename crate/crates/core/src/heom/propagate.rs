use num_complex::Complex64;

use super::hierarchy::DEFAULT_ADO_BUDGET;
use super::rhs::HeomGenerator;
use super::trajectory::{hermiticity_defect, trace, DensityMatrix, Trajectory, TrajectoryMeta};
use crate::error::{Error, Result};
use crate::model::{BathSpec, ExcitonHamiltonian};
use crate::units::UnitSystem;

/// System, bath and unit conventions of one simulation.
#[derive(Debug, Clone)]
pub struct HeomModel {
    pub hamiltonian: ExcitonHamiltonian,
    pub bath: BathSpec,
    pub units: UnitSystem,
}

impl HeomModel {
    pub fn new(hamiltonian: ExcitonHamiltonian, bath: BathSpec) -> Self {
        HeomModel {
            hamiltonian,
            bath,
            units: UnitSystem::default(),
        }
    }

    pub fn with_bath(&self, bath: BathSpec) -> Self {
        HeomModel {
            bath,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Classical fixed-step 4th-order Runge–Kutta.
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    /// Integrator step, fs.
    pub dt: f64,
    pub t_max: f64,
    /// Output spacing, fs. Values below `dt` fall back to every step.
    pub output_stride: f64,
    pub truncation_level: usize,
    pub integrator: Integrator,
    pub ado_budget: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            dt: 1.0,
            t_max: 2000.0,
            output_stride: 1.0,
            truncation_level: 4,
            integrator: Integrator::Rk4,
            ado_budget: DEFAULT_ADO_BUDGET,
        }
    }
}

/// `value / unit` as an integer, if it is one to within rounding.
fn integer_ratio(value: f64, unit: f64) -> Option<usize> {
    let r = value / unit;
    let n = r.round();
    ((r - n).abs() <= 1e-9 * n.max(1.0) && n >= 0.0).then_some(n as usize)
}

impl PropagationConfig {
    /// Returns (total steps, steps per output sample).
    pub fn step_plan(&self) -> Result<(usize, usize)> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be >= 0, got {}",
                self.t_max
            )));
        }
        if !(self.output_stride > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "output stride must be positive, got {}",
                self.output_stride
            )));
        }
        let steps = integer_ratio(self.t_max, self.dt).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "t_max {} is not a multiple of dt {}",
                self.t_max, self.dt
            ))
        })?;
        let per_output = if self.output_stride <= self.dt {
            1
        } else {
            integer_ratio(self.output_stride, self.dt).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "output stride {} is not a multiple of dt {}",
                    self.output_stride, self.dt
                ))
            })?
        };
        if steps % per_output != 0 {
            return Err(Error::InvalidParameter(format!(
                "t_max {} is not a multiple of the output stride {}",
                self.t_max,
                per_output as f64 * self.dt
            )));
        }
        Ok((steps, per_output))
    }

    /// Effective output spacing in fs.
    pub fn effective_stride(&self) -> Result<f64> {
        Ok(self.step_plan()?.1 as f64 * self.dt)
    }
}

/// Fixed-step RK4 over the flattened hierarchy. Keeps four state-sized
/// buffers.
struct Rk4 {
    stage: Vec<Complex64>,
    slope: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl Rk4 {
    fn new(len: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Rk4 {
            stage: vec![zero; len],
            slope: vec![zero; len],
            acc: vec![zero; len],
        }
    }

    fn step(&mut self, gen: &HeomGenerator, y: &mut [Complex64], dt: f64) {
        let half = 0.5 * dt;
        gen.derivative(y, &mut self.slope);
        for ((a, s), (st, yv)) in self
            .acc
            .iter_mut()
            .zip(&self.slope)
            .zip(self.stage.iter_mut().zip(y.iter()))
        {
            *a = *s;
            *st = yv + s * half;
        }
        gen.derivative(&self.stage, &mut self.slope);
        for ((a, s), (st, yv)) in self
            .acc
            .iter_mut()
            .zip(&self.slope)
            .zip(self.stage.iter_mut().zip(y.iter()))
        {
            *a += s * 2.0;
            *st = yv + s * half;
        }
        gen.derivative(&self.stage, &mut self.slope);
        for ((a, s), (st, yv)) in self
            .acc
            .iter_mut()
            .zip(&self.slope)
            .zip(self.stage.iter_mut().zip(y.iter()))
        {
            *a += s * 2.0;
            *st = yv + s * dt;
        }
        gen.derivative(&self.stage, &mut self.slope);
        let sixth = dt / 6.0;
        for ((yv, a), s) in y.iter_mut().zip(&self.acc).zip(&self.slope) {
            *yv += (a + s) * sixth;
        }
    }
}

fn zero_ado(state: &[Complex64], n: usize) -> DensityMatrix {
    DensityMatrix::from_row_slice(n, n, &state[..n * n])
}

/// Validates an initial reduced density matrix.
pub fn check_initial_state(rho0: &DensityMatrix, n_sites: usize) -> Result<()> {
    if rho0.nrows() != n_sites || rho0.ncols() != n_sites {
        return Err(Error::InvalidParameter(format!(
            "initial state is {}x{}, model has {n_sites} sites",
            rho0.nrows(),
            rho0.ncols()
        )));
    }
    if (trace(rho0) - 1.0).norm() > 1e-12 {
        return Err(Error::InvalidParameter(
            "initial state must have unit trace".into(),
        ));
    }
    if hermiticity_defect(rho0) > 1e-12 {
        return Err(Error::InvalidParameter(
            "initial state must be Hermitian".into(),
        ));
    }
    Ok(())
}

/// Propagates the factorized initial state `rho0 ⊗ ρ_bath` (all auxiliary
/// operators zero) and records ρ_s on the output grid.
pub fn propagate(
    rho0: &DensityMatrix,
    model: &HeomModel,
    config: &PropagationConfig,
) -> Result<Trajectory> {
    let n = model.hamiltonian.n_sites();
    check_initial_state(rho0, n)?;
    let (steps, per_output) = config.step_plan()?;
    let Integrator::Rk4 = config.integrator;
    let gen = HeomGenerator::new(
        &model.hamiltonian,
        &model.bath,
        &model.units,
        config.truncation_level,
        config.ado_budget,
    )?;

    let mut state = vec![Complex64::new(0.0, 0.0); gen.state_len()];
    for a in 0..n {
        for b in 0..n {
            state[a * n + b] = rho0[(a, b)];
        }
    }

    let n_out = steps / per_output + 1;
    let mut times = Vec::with_capacity(n_out);
    let mut states = Vec::with_capacity(n_out);
    times.push(0.0);
    states.push(zero_ado(&state, n));

    let mut rk = Rk4::new(state.len());
    for step in 1..=steps {
        rk.step(&gen, &mut state, config.dt);
        if step % per_output == 0 {
            let t = step as f64 * config.dt;
            if state.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Divergence { time_fs: t });
            }
            times.push(t);
            states.push(zero_ado(&state, n));
        }
    }

    let initial_site = (0..n)
        .find(|&i| rho0[(i, i)] == Complex64::new(1.0, 0.0))
        .map(|i| i + 1);
    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta {
            n_sites: n,
            bath: Some(model.bath),
            truncation_level: Some(config.truncation_level),
            dt_fs: Some(config.dt),
            stride_fs: per_output as f64 * config.dt,
            initial_site,
            hamiltonian_checksum: Some(model.hamiltonian.checksum()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heom::trajectory::site_state;

    #[test]
    fn step_plan() {
        let cfg = PropagationConfig {
            dt: 0.5,
            t_max: 10.0,
            output_stride: 0.1,
            ..Default::default()
        };
        assert_eq!(cfg.step_plan().unwrap(), (20, 1));
        let cfg = PropagationConfig {
            output_stride: 2.0,
            ..cfg
        };
        assert_eq!(cfg.step_plan().unwrap(), (20, 4));
        let bad = PropagationConfig {
            output_stride: 0.75,
            ..cfg
        };
        assert!(bad.step_plan().is_err());
        let bad = PropagationConfig { t_max: 10.2, ..cfg };
        assert!(bad.step_plan().is_err());
        let paper = PropagationConfig {
            dt: 0.1,
            t_max: 2000.0,
            output_stride: 0.1,
            ..cfg
        };
        assert_eq!(paper.step_plan().unwrap(), (20000, 1));
    }

    #[test]
    fn rejects_invalid_initial_state() {
        let model = HeomModel::new(
            ExcitonHamiltonian::fmo(),
            BathSpec::new(0.0, 100.0, 300.0, 0).unwrap(),
        );
        let cfg = PropagationConfig {
            t_max: 1.0,
            ..Default::default()
        };
        let mut rho = site_state(8, 1).unwrap();
        rho[(1, 1)] = Complex64::new(0.5, 0.0);
        assert!(propagate(&rho, &model, &cfg).is_err());
        assert!(propagate(&site_state(2, 1).unwrap(), &model, &cfg).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        // dt far beyond the RK4 stability limit of the FMO spectrum.
        let model = HeomModel::new(
            ExcitonHamiltonian::fmo(),
            BathSpec::new(100.0, 300.0, 300.0, 0).unwrap(),
        );
        let cfg = PropagationConfig {
            dt: 200.0,
            t_max: 200_000.0,
            output_stride: 200.0,
            truncation_level: 2,
            ..Default::default()
        };
        match propagate(&site_state(8, 1).unwrap(), &model, &cfg) {
            Err(Error::Divergence { time_fs }) => assert!(time_fs > 0.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
