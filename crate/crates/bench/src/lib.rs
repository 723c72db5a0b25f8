//! Fixtures shared by the benchmarks.

use heom_core::heom::{site_state, DensityMatrix, HeomGenerator, DEFAULT_ADO_BUDGET};
use heom_core::model::{BathSpec, ExcitonHamiltonian};
use heom_core::UnitSystem;
use num_complex::Complex64;

/// FMO generator at λ = 40, γ = 100 cm⁻¹, T = 310 K.
pub fn fmo_generator(level: usize, matsubara: usize) -> HeomGenerator {
    let bath = BathSpec::new(40.0, 100.0, 310.0, matsubara).expect("valid bath");
    HeomGenerator::new(
        &ExcitonHamiltonian::fmo(),
        &bath,
        &UnitSystem::default(),
        level,
        DEFAULT_ADO_BUDGET,
    )
    .expect("hierarchy fits the budget")
}

/// A dense, arbitrary hierarchy state.
pub fn dense_state(len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()) * 1e-2)
        .collect()
}

/// Mixed, delocalized 8-site state.
pub fn mixed_state() -> DensityMatrix {
    let pure = DensityMatrix::from_fn(8, 8, |i, k| {
        Complex64::from_polar(0.125, (i as f64 - k as f64) * 0.4)
    });
    let local = site_state(8, 3).expect("site exists");
    pure * Complex64::new(0.7, 0.0) + local * Complex64::new(0.3, 0.0)
}
