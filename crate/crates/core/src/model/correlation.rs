//! Bath correlation function of the Drude–Lorentz bath: a quadrature
//! reference and the exponential (Matsubara) decomposition used by the
//! hierarchy.

use std::f64::consts::PI;

use num_complex::Complex64;
use quadrature::double_exponential;

use super::bath::BathSpec;
use crate::error::{Error, Result};
use crate::units::UnitSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// The finite part of the integral runs to `cutoff_factor * max(γ, 1/β)`;
    /// beyond it the oscillatory tail is summed period by period.
    pub cutoff_factor: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            cutoff_factor: 50.0,
            rel_tol: 1e-8,
            max_intervals: 200_000,
        }
    }
}

/// J(ω)·coth(βω/2), finite at ω = 0.
fn thermal_weight(omega: f64, bath: &BathSpec, beta: f64) -> f64 {
    let x = 0.5 * beta * omega;
    let g2 = bath.gamma * bath.gamma;
    if x < 1e-6 {
        // coth(x) ≈ 1/x + x/3
        2.0 * bath.lambda * bath.gamma / (g2 + omega * omega) * (2.0 / beta + omega * x / 3.0)
    } else {
        bath.spectral_density(omega) / x.tanh()
    }
}

/// Wynn's epsilon algorithm; returns the latest extrapolated limit of the
/// partial sums.
fn wynn_epsilon(partial_sums: &[f64]) -> f64 {
    let n = partial_sums.len();
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = partial_sums.to_vec();
    let mut best = *partial_sums.last().unwrap();
    let mut col = 0;
    while cur.len() > 1 {
        let next: Vec<f64> = (0..cur.len() - 1)
            .map(|i| {
                let d = cur[i + 1] - cur[i];
                let base = if col == 0 { 0.0 } else { prev[i + 1] };
                if d == 0.0 {
                    f64::INFINITY
                } else {
                    base + 1.0 / d
                }
            })
            .collect();
        col += 1;
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        // Even columns hold the extrapolants.
        if col % 2 == 0 {
            best = *next.last().unwrap();
        }
        prev = cur;
        cur = next;
    }
    best
}

/// ∫₀^∞ f(ω)·trig(ωτ) dω with `trig` vanishing at ωτ = phase + mπ.
///
/// Integrates exactly between consecutive zeros of the trigonometric factor,
/// straight through to the cutoff, then accelerates the alternating tail with
/// Wynn's epsilon algorithm.
fn oscillatory_half_line(
    f: impl Fn(f64) -> f64,
    tau: f64,
    first_zero: f64,
    cutoff: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Option<(f64, f64)> {
    let period = PI / tau;
    let abs_tol = 1e-14 * scale;
    let piece = |a: f64, b: f64| double_exponential::integrate(&f, a, b, abs_tol).integral;

    let mut sum = piece(0.0, first_zero);
    let mut edge = first_zero;
    while edge < cutoff {
        sum += piece(edge, edge + period);
        edge += period;
    }

    let mut partial = vec![sum];
    let mut last_estimate = f64::NAN;
    for i in 0..cfg.max_intervals {
        sum += piece(edge, edge + period);
        edge += period;
        partial.push(sum);
        if partial.len() >= 5 {
            let tail = &partial[partial.len().saturating_sub(24)..];
            let estimate = wynn_epsilon(tail);
            let err = (estimate - last_estimate).abs();
            if i > 6 && err <= cfg.rel_tol * estimate.abs() + abs_tol {
                return Some((estimate, err));
            }
            last_estimate = estimate;
        }
    }
    None
}

/// Quadrature of C(τ) = (1/π)∫₀^∞ J(ω)[coth(βω/2)cos(ωτ) − i sin(ωτ)] dω.
///
/// `tau_fs` must be strictly positive when λ > 0: the real part diverges
/// logarithmically at τ = 0. Result in (cm⁻¹)².
pub fn bath_correlation(
    tau_fs: f64,
    bath: &BathSpec,
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    if bath.lambda == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if !(tau_fs > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "correlation quadrature needs tau > 0, got {tau_fs}"
        )));
    }
    let tau = units.fs_to_cm(tau_fs);
    let beta = bath.beta(units);
    let cutoff = cfg.cutoff_factor * bath.gamma.max(1.0 / beta);
    let scale = bath.lambda * (bath.gamma + 2.0 / beta);
    let fail = |error| Error::QuadratureFailure { tau_fs, error };

    let (re, _) = oscillatory_half_line(
        |w| thermal_weight(w, bath, beta) * (w * tau).cos() / PI,
        tau,
        0.5 * PI / tau,
        cutoff,
        scale,
        cfg,
    )
    .ok_or_else(|| fail(f64::NAN))?;
    let (im, _) = oscillatory_half_line(
        |w| -bath.spectral_density(w) * (w * tau).sin() / PI,
        tau,
        PI / tau,
        cutoff,
        scale,
        cfg,
    )
    .ok_or_else(|| fail(f64::NAN))?;
    Ok(Complex64::new(re, im))
}

/// C(τ) ≈ Σₖ cₖ exp(−νₖ τ), k = 0..K, plus a white-noise remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct MatsubaraExpansion {
    /// cₖ in (cm⁻¹)².
    pub coefficients: Vec<Complex64>,
    /// νₖ in cm⁻¹.
    pub rates: Vec<f64>,
    /// Σ_{k>K} cₖ/νₖ in cm⁻¹: weight of the truncated tail treated as an
    /// instantaneous (Markovian) dissipator.
    pub terminator_rate: f64,
}

impl MatsubaraExpansion {
    pub fn new(bath: &BathSpec, units: &UnitSystem) -> Result<Self> {
        bath.validate()?;
        let beta = bath.beta(units);
        let bg = beta * bath.gamma;
        // cot(βγ/2) has poles at βγ = 2πm for every m, cancelled only by the
        // m-th Matsubara term.
        let m = (bg / (2.0 * PI)).round();
        if m >= 1.0 && (bg - 2.0 * PI * m).abs() < 1e-8 * bg {
            return Err(Error::DegenerateParameters {
                beta_gamma: bg,
                k: m as usize,
            });
        }

        let lg = bath.lambda * bath.gamma;
        let cot = 1.0 / (0.5 * bg).tan();
        let mut coefficients = vec![Complex64::new(lg * cot, -lg)];
        let mut rates = vec![bath.gamma];
        let mut tail = 2.0 * bath.lambda / bg - bath.lambda * cot;
        for k in 1..=bath.n_matsubara {
            let nu = 2.0 * PI * k as f64 / beta;
            let c = 4.0 * lg / beta * nu / (nu * nu - bath.gamma * bath.gamma);
            coefficients.push(Complex64::new(c, 0.0));
            rates.push(nu);
            tail -= c / nu;
        }
        Ok(MatsubaraExpansion {
            coefficients,
            rates,
            terminator_rate: tail,
        })
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Σₖ cₖ exp(−νₖ τ) at `tau_fs`, (cm⁻¹)².
    pub fn correlation(&self, tau_fs: f64, units: &UnitSystem) -> Complex64 {
        let tau = units.fs_to_cm(tau_fs);
        self.coefficients
            .iter()
            .zip(&self.rates)
            .map(|(c, nu)| c * (-nu * tau).exp())
            .sum()
    }
}
