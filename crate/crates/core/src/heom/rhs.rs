//! Time derivative of the full ADO hierarchy for Drude–Lorentz baths.
//!
//! ADOs are stored rescaled, ρ̃ₙ = ρₙ / Πₘ √(nₘ! |cₘ|^{nₘ}), which puts the
//! upward and downward couplings on the same footing at every depth. The
//! zero-index ADO is unaffected by the scaling.
//!
//! For the ADO with multi-index n:
//!
//! ```text
//! dρ̃ₙ/dt = −i[H, ρ̃ₙ] − (Σₘ nₘ νₘ) ρ̃ₙ − Δ Σⱼ [Vⱼ, [Vⱼ, ρ̃ₙ]]
//!          − i Σₘ √((nₘ+1)|cₘ|) [Vⱼ₍ₘ₎, ρ̃ₙ₊ₘ]
//!          − i Σₘ √(nₘ/|cₘ|) (cₘ Vⱼ₍ₘ₎ ρ̃ₙ₋ₘ − cₘ* ρ̃ₙ₋ₘ Vⱼ₍ₘ₎)
//! ```
//!
//! with Vⱼ = |j⟩⟨j| and Δ the Matsubara tail weight. Upward links from the
//! deepest tier are dropped.

use num_complex::Complex64;
use rayon::prelude::*;

use super::hierarchy::{HierarchyIndex, NO_NEIGHBOR};
use crate::error::Result;
use crate::model::{BathSpec, ExcitonHamiltonian, MatsubaraExpansion};
use crate::units::UnitSystem;

/// Below this many ADOs the derivative is evaluated on the calling thread.
const PARALLEL_THRESHOLD: usize = 64;

/// Linear generator of the hierarchy, with all rates in rad/fs.
#[derive(Debug, Clone)]
pub struct HeomGenerator {
    index: HierarchyIndex,
    n: usize,
    hamiltonian: Vec<f64>,
    mode_site: Vec<usize>,
    mode_coeff: Vec<Complex64>,
    mode_scale: Vec<f64>,
    decay: Vec<f64>,
    dephasing: f64,
}

impl HeomGenerator {
    pub fn new(
        hamiltonian: &ExcitonHamiltonian,
        bath: &BathSpec,
        units: &UnitSystem,
        truncation_level: usize,
        ado_budget: usize,
    ) -> Result<Self> {
        let expansion = MatsubaraExpansion::new(bath, units)?;
        let n = hamiltonian.n_sites();
        let index = HierarchyIndex::build(n, bath.n_matsubara, truncation_level, ado_budget)?;
        let n_terms = index.n_terms();
        let w = units.cm1_to_rad_per_fs;

        let h: Vec<f64> = (0..n * n)
            .map(|i| hamiltonian.matrix()[(i / n, i % n)] * w)
            .collect();
        let rates: Vec<f64> = expansion.rates.iter().map(|r| r * w).collect();
        let coeffs: Vec<Complex64> = expansion.coefficients.iter().map(|c| c * (w * w)).collect();

        let mode_site = (0..index.n_modes()).map(|m| m / n_terms).collect();
        let mode_coeff: Vec<Complex64> =
            (0..index.n_modes()).map(|m| coeffs[m % n_terms]).collect();
        let mode_scale = mode_coeff.iter().map(|c| c.norm().sqrt()).collect();
        let decay = index
            .indices()
            .iter()
            .map(|idx| {
                idx.exponents()
                    .iter()
                    .enumerate()
                    .map(|(m, &e)| e as f64 * rates[m % n_terms])
                    .sum()
            })
            .collect();

        Ok(HeomGenerator {
            index,
            n,
            hamiltonian: h,
            mode_site,
            mode_coeff,
            mode_scale,
            decay,
            // Σⱼ [Vⱼ,[Vⱼ,X]] = 2 X off the diagonal, 0 on it.
            dephasing: 2.0 * expansion.terminator_rate * w,
        })
    }

    pub fn index(&self) -> &HierarchyIndex {
        &self.index
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn n_ados(&self) -> usize {
        self.index.len()
    }

    /// Length of a flattened hierarchy state.
    pub fn state_len(&self) -> usize {
        self.n_ados() * self.n * self.n
    }

    /// Writes the derivative of every ADO in `state` into `out`. ADO blocks
    /// are independent, so the result does not depend on thread count.
    pub fn derivative(&self, state: &[Complex64], out: &mut [Complex64]) {
        let nn = self.n * self.n;
        debug_assert_eq!(state.len(), self.state_len());
        debug_assert_eq!(out.len(), self.state_len());
        if self.n_ados() < PARALLEL_THRESHOLD {
            out.chunks_mut(nn)
                .enumerate()
                .for_each(|(i, block)| self.ado_derivative(i, state, block));
        } else {
            out.par_chunks_mut(nn)
                .enumerate()
                .with_min_len(16)
                .for_each(|(i, block)| self.ado_derivative(i, state, block));
        }
    }

    fn ado_derivative(&self, ado: usize, state: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let nn = n * n;
        let x = &state[ado * nn..(ado + 1) * nn];
        let h = &self.hamiltonian;
        let decay = self.decay[ado];

        if n == 8 {
            commutator_fixed::<8>(h, x, out, decay, self.dephasing);
        } else {
            commutator(n, h, x, out, decay, self.dephasing);
        }

        let exps = self.index.indices()[ado].exponents();
        let up = self.index.up_row(ado);
        let down = self.index.down_row(ado);
        for m in 0..exps.len() {
            let scale = self.mode_scale[m];
            if scale == 0.0 {
                continue;
            }
            let j = self.mode_site[m];
            let occ = exps[m] as f64;

            if up[m] != NO_NEIGHBOR {
                let y = &state[up[m] as usize * nn..(up[m] as usize + 1) * nn];
                let f = ((occ + 1.0).sqrt()) * scale;
                // −i f [Vⱼ, Y]; the (j, j) entries cancel exactly.
                for b in 0..n {
                    if b != j {
                        let t = y[j * n + b] * f;
                        out[j * n + b] += Complex64::new(t.im, -t.re);
                    }
                }
                for a in 0..n {
                    if a != j {
                        let t = y[a * n + j] * f;
                        out[a * n + j] -= Complex64::new(t.im, -t.re);
                    }
                }
            }

            if down[m] != NO_NEIGHBOR {
                let y = &state[down[m] as usize * nn..(down[m] as usize + 1) * nn];
                let g = occ.sqrt() / scale;
                let c = self.mode_coeff[m] * g;
                let c_conj = c.conj();
                // −i (c Vⱼ Y − c* Y Vⱼ)
                for b in 0..n {
                    let t = c * y[j * n + b];
                    out[j * n + b] += Complex64::new(t.im, -t.re);
                }
                for a in 0..n {
                    let t = c_conj * y[a * n + j];
                    out[a * n + j] -= Complex64::new(t.im, -t.re);
                }
            }
        }
    }
}

/// Writes −i[H, x] − decay·x − dephasing·x (off the diagonal) into `out`.
/// Rows are accumulated over contiguous memory; H is real.
#[inline(always)]
fn commutator(
    n: usize,
    h: &[f64],
    x: &[Complex64],
    out: &mut [Complex64],
    decay: f64,
    dephasing: f64,
) {
    for a in 0..n {
        let row = &mut out[a * n..(a + 1) * n];
        row.fill(Complex64::new(0.0, 0.0));
        for k in 0..n {
            let hak = h[a * n + k];
            let xak = x[a * n + k];
            let xk = &x[k * n..(k + 1) * n];
            let hk = &h[k * n..(k + 1) * n];
            for b in 0..n {
                row[b] += xk[b] * hak - xak * hk[b];
            }
        }
        for b in 0..n {
            let comm = row[b];
            let rate = if a == b { decay } else { decay + dephasing };
            row[b] = Complex64::new(comm.im, -comm.re) - x[a * n + b] * rate;
        }
    }
}

/// [`commutator`] with the size known at compile time, which lets the
/// inner loops unroll.
fn commutator_fixed<const N: usize>(
    h: &[f64],
    x: &[Complex64],
    out: &mut [Complex64],
    decay: f64,
    dephasing: f64,
) {
    commutator(
        N,
        &h[..N * N],
        &x[..N * N],
        &mut out[..N * N],
        decay,
        dephasing,
    )
}
