//! Unit conventions.
//!
//! Energies are carried in cm⁻¹ and times in fs with ℏ = 1, so an energy `E`
//! generates phase at `E * cm1_to_rad_per_fs` rad/fs.

use std::f64::consts::PI;

/// Speed of light in cm/s (exact by SI definition).
const SPEED_OF_LIGHT_CM_PER_S: f64 = 2.997_924_58e10;

/// Boltzmann constant in cm⁻¹/K (CODATA 2018, k_B / (h c)).
const BOLTZMANN_CM1_PER_K: f64 = 0.695_034_800;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// Boltzmann constant, cm⁻¹/K.
    pub k_b: f64,
    /// Angular frequency in rad/fs corresponding to 1 cm⁻¹.
    pub cm1_to_rad_per_fs: f64,
}

impl UnitSystem {
    pub const fn spectroscopic() -> Self {
        UnitSystem {
            k_b: BOLTZMANN_CM1_PER_K,
            cm1_to_rad_per_fs: 2.0 * PI * SPEED_OF_LIGHT_CM_PER_S * 1e-15,
        }
    }

    /// Converts an energy (cm⁻¹) to an angular frequency (rad/fs).
    #[inline]
    pub fn rate(&self, energy_cm1: f64) -> f64 {
        energy_cm1 * self.cm1_to_rad_per_fs
    }

    /// Converts a time in fs to the reciprocal-energy unit cm (so that
    /// `energy_cm1 * time_cm` is a phase in radians).
    #[inline]
    pub fn fs_to_cm(&self, time_fs: f64) -> f64 {
        time_fs * self.cm1_to_rad_per_fs
    }

    /// Inverse temperature β = 1/(k_B T) in cm.
    #[inline]
    pub fn beta(&self, temperature_k: f64) -> f64 {
        1.0 / (self.k_b * temperature_k)
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::spectroscopic()
    }
}
