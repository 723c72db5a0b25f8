//! Excitonic system, bath parameterization and the closed-form scalar
//! quantities derived from them.

mod bath;
mod correlation;
mod hamiltonian;

pub use bath::{efficiency_parameter, spectral_density, BathSpec, EfficiencyParameter};
pub use correlation::{bath_correlation, MatsubaraExpansion, QuadratureConfig};
pub use hamiltonian::{ExcitonHamiltonian, FMO_MODEL_NAME, FMO_OFFSET_CM1};

/// Average energy gap of `h`, cm⁻¹. See [`ExcitonHamiltonian::average_energy_gap`].
pub fn average_energy_gap(h: &ExcitonHamiltonian) -> f64 {
    h.average_energy_gap()
}

/// The built-in 8-site FMO Hamiltonian.
pub fn fmo_hamiltonian() -> ExcitonHamiltonian {
    ExcitonHamiltonian::fmo()
}
