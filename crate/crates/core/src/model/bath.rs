use crate::error::{Error, Result};
use crate::units::UnitSystem;

/// Overdamped Drude–Lorentz bath attached identically and independently to
/// every site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    /// Reorganization energy λ, cm⁻¹.
    pub lambda: f64,
    /// Cut-off frequency γ, cm⁻¹.
    pub gamma: f64,
    /// Temperature, K.
    pub temperature: f64,
    /// Number of Matsubara terms K kept explicitly.
    pub n_matsubara: usize,
}

impl BathSpec {
    /// λ may be zero (decoupled system); γ and T must be positive.
    pub fn new(lambda: f64, gamma: f64, temperature: f64, n_matsubara: usize) -> Result<Self> {
        let spec = BathSpec {
            lambda,
            gamma,
            temperature,
            n_matsubara,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "reorganization energy must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cut-off frequency must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    /// β = 1/(k_B T) in cm.
    pub fn beta(&self, units: &UnitSystem) -> f64 {
        units.beta(self.temperature)
    }

    pub fn beta_gamma(&self, units: &UnitSystem) -> f64 {
        self.beta(units) * self.gamma
    }

    pub fn with_matsubara(self, n_matsubara: usize) -> Self {
        BathSpec {
            n_matsubara,
            ..self
        }
    }

    /// J(ω) = 2λγω/(γ² + ω²), ω in cm⁻¹.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        spectral_density(omega, self)
    }
}

/// Drude–Lorentz spectral density; peaks at ω = γ with value λ.
pub fn spectral_density(omega: f64, bath: &BathSpec) -> f64 {
    2.0 * bath.lambda * bath.gamma * omega / (bath.gamma * bath.gamma + omega * omega)
}

/// Efficiency parameter Λ = λ/(βγg) and the log-scale diagnostics used to
/// organize parameter sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyParameter {
    pub value: f64,
    /// ln Λ
    pub ln_value: f64,
    /// ln(γ/λ), the log Kubo number. −∞ is never produced; λ = 0 gives +∞.
    pub ln_gamma_over_lambda: f64,
    /// ln(γβ)
    pub ln_gamma_beta: f64,
}

pub fn efficiency_parameter(
    bath: &BathSpec,
    g: f64,
    units: &UnitSystem,
) -> Result<EfficiencyParameter> {
    if !(g > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "average energy gap must be positive, got {g}"
        )));
    }
    let beta_gamma = bath.beta_gamma(units);
    let value = bath.lambda / (beta_gamma * g);
    Ok(EfficiencyParameter {
        value,
        ln_value: value.ln(),
        ln_gamma_over_lambda: (bath.gamma / bath.lambda).ln(),
        ln_gamma_beta: beta_gamma.ln(),
    })
}
