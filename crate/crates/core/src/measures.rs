//! Entropy, global entanglement, concurrence and coherence length of
//! single-excitation density matrices, pointwise and along trajectories.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::heom::{DensityMatrix, Trajectory};

/// Eigenvalues in [−EIGENVALUE_CLAMP, 0) are treated as roundoff and set to 0.
pub const EIGENVALUE_CLAMP: f64 = 1e-9;

/// Display threshold for density-matrix snapshots.
pub const SNAPSHOT_THRESHOLD: f64 = 0.005;

/// Unordered pair of 1-based site indices, stored with `first < second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SitePair(usize, usize);

impl SitePair {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == k || n == 0 || k == 0 {
            return Err(Error::InvalidPair(n, k));
        }
        Ok(SitePair(n.min(k), n.max(k)))
    }

    pub fn first(&self) -> usize {
        self.0
    }

    pub fn second(&self) -> usize {
        self.1
    }

    /// Column label, e.g. `C_1_2`.
    pub fn label(&self) -> String {
        format!("C_{}_{}", self.0, self.1)
    }
}

impl std::str::FromStr for SitePair {
    type Err = Error;

    /// Parses `n,k` or `n-k`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split([',', '-']).map(str::trim).collect();
        let bad = || Error::InvalidParameter(format!("invalid site pair {s:?}, expected n,k"));
        if parts.len() != 2 {
            return Err(bad());
        }
        let n = parts[0].parse().map_err(|_| bad())?;
        let k = parts[1].parse().map_err(|_| bad())?;
        SitePair::new(n, k)
    }
}

/// Sites 1-2, 1-3 and 3-4.
pub fn default_pairs() -> Vec<SitePair> {
    vec![SitePair(1, 2), SitePair(1, 3), SitePair(3, 4)]
}

/// Hermitian-part eigenvalues, negatives within the clamp window zeroed.
fn clamped_spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    if !rho.is_square() {
        return Err(Error::InvalidState {
            reason: "density matrix is not square".into(),
            at_index: None,
        });
    }
    let hermitian = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(hermitian);
    eig.eigenvalues
        .iter()
        .map(|&p| {
            if p >= 0.0 {
                Ok(p)
            } else if p >= -EIGENVALUE_CLAMP {
                Ok(0.0)
            } else {
                Err(Error::InvalidState {
                    reason: format!("eigenvalue {p:e} below -{EIGENVALUE_CLAMP:e}"),
                    at_index: None,
                })
            }
        })
        .collect()
}

fn shannon(probabilities: impl Iterator<Item = f64>) -> f64 {
    probabilities
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// S(ρ) = −Tr ρ ln ρ, in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(shannon(clamped_spectrum(rho)?.into_iter()))
}

fn diagonal_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut pops = Vec::with_capacity(rho.nrows());
    for i in 0..rho.nrows() {
        let p = rho[(i, i)].re;
        if p < -EIGENVALUE_CLAMP {
            return Err(Error::InvalidState {
                reason: format!("population of site {} is {p:e}", i + 1),
                at_index: None,
            });
        }
        pops.push(p.max(0.0));
    }
    Ok(shannon(pops.into_iter()))
}

/// E[ρ] = −Σₙ ρₙₙ ln ρₙₙ − S(ρ): entropy of the site populations minus the
/// von Neumann entropy. Zero for every diagonal state.
pub fn global_entanglement(rho: &DensityMatrix) -> Result<f64> {
    Ok(diagonal_entropy(rho)? - von_neumann_entropy(rho)?)
}

/// C_nk = 2|ρ_nk| for 1-based sites n ≠ k.
pub fn concurrence(rho: &DensityMatrix, n: usize, k: usize) -> Result<f64> {
    let pair = SitePair::new(n, k)?;
    if pair.second() > rho.nrows() {
        return Err(Error::InvalidPair(n, k));
    }
    Ok(2.0 * rho[(n - 1, k - 1)].norm())
}

/// L_ρ = (Σₙₖ |ρₙₖ|)² / (N Σₙₖ |ρₙₖ|²) in the site basis, diagonal included.
///
/// Ranges from 1/N (single site) through 1 (I/N) to N (uniform pure
/// superposition).
pub fn coherence_length(rho: &DensityMatrix) -> Result<f64> {
    let sum: f64 = rho.iter().map(|z| z.norm()).sum();
    let sum_sq: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
    if sum_sq == 0.0 {
        return Err(Error::UndefinedMeasure);
    }
    Ok(sum * sum / (rho.nrows() as f64 * sum_sq))
}

/// Observables sampled along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSeries {
    pub times: Vec<f64>,
    pub global_entanglement: Vec<f64>,
    pub entropy: Vec<f64>,
    pub coherence_length: Vec<f64>,
    /// Concurrence series, in the order the pairs were requested.
    pub concurrences: Vec<(SitePair, Vec<f64>)>,
}

impl MeasureSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn concurrence(&self, pair: SitePair) -> Option<&[f64]> {
        self.concurrences
            .iter()
            .find(|(p, _)| *p == pair)
            .map(|(_, v)| v.as_slice())
    }

    /// Index of the sample nearest `t_fs`.
    pub fn nearest_index(&self, t_fs: f64) -> Option<usize> {
        (0..self.times.len()).min_by(|&a, &b| {
            (self.times[a] - t_fs)
                .abs()
                .total_cmp(&(self.times[b] - t_fs).abs())
        })
    }
}

fn at_index(i: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::InvalidState { reason, .. } => Error::InvalidState {
            reason,
            at_index: Some(i),
        },
        other => other,
    }
}

/// Applies every measure at every output time.
pub fn trajectory_measures(traj: &Trajectory, pairs: &[SitePair]) -> Result<MeasureSeries> {
    let n = traj.n_sites();
    if let Some(p) = pairs.iter().find(|p| p.second() > n) {
        return Err(Error::InvalidPair(p.first(), p.second()));
    }
    let mut series = MeasureSeries {
        times: traj.times.clone(),
        global_entanglement: Vec::with_capacity(traj.len()),
        entropy: Vec::with_capacity(traj.len()),
        coherence_length: Vec::with_capacity(traj.len()),
        concurrences: pairs
            .iter()
            .map(|&p| (p, Vec::with_capacity(traj.len())))
            .collect(),
    };
    for (i, rho) in traj.states.iter().enumerate() {
        let s = von_neumann_entropy(rho).map_err(at_index(i))?;
        let e = diagonal_entropy(rho).map_err(at_index(i))? - s;
        series.entropy.push(s);
        series.global_entanglement.push(e);
        series
            .coherence_length
            .push(coherence_length(rho).map_err(at_index(i))?);
        for (pair, values) in series.concurrences.iter_mut() {
            values.push(2.0 * rho[(pair.first() - 1, pair.second() - 1)].norm());
        }
    }
    Ok(series)
}

/// |ρ_nk| at one output time, with entries below a display threshold flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySnapshot {
    pub requested_time: f64,
    pub time: f64,
    /// Set when `requested_time` was not on the output grid and the nearest
    /// sample was used instead.
    pub off_grid: bool,
    pub threshold: f64,
    pub values: DensityMatrix,
    pub magnitudes: DMatrix<f64>,
    pub below_threshold: DMatrix<bool>,
}

impl DensitySnapshot {
    /// Whitespace table of magnitudes; flagged entries are printed as `.`.
    pub fn to_table(&self) -> String {
        let n = self.magnitudes.nrows();
        let mut out = format!(
            "# snapshot t_fs = {} (requested {}){}\n# threshold = {}\n",
            self.time,
            self.requested_time,
            if self.off_grid {
                " off-grid: nearest sample used"
            } else {
                ""
            },
            self.threshold
        );
        out.push_str("site");
        for k in 1..=n {
            out.push_str(&format!(" {k:>8}"));
        }
        out.push('\n');
        for i in 0..n {
            out.push_str(&format!("{:>4}", i + 1));
            for k in 0..n {
                if self.below_threshold[(i, k)] {
                    out.push_str(&format!(" {:>8}", "."));
                } else {
                    out.push_str(&format!(" {:>8.5}", self.magnitudes[(i, k)]));
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn density_snapshot(traj: &Trajectory, t_fs: f64, threshold: f64) -> Result<DensitySnapshot> {
    let i = traj
        .nearest_index(t_fs)
        .ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    let time = traj.times[i];
    let values = traj.states[i].clone();
    let magnitudes = values.map(|z| z.norm());
    let below_threshold = magnitudes.map(|m| m < threshold);
    Ok(DensitySnapshot {
        requested_time: t_fs,
        time,
        off_grid: (time - t_fs).abs() > 1e-9 * t_fs.abs().max(1.0),
        threshold,
        values,
        magnitudes,
        below_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heom::{site_state, TrajectoryMeta};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mixed(n: usize) -> DensityMatrix {
        DensityMatrix::identity(n, n) * c(1.0 / n as f64)
    }

    fn uniform_pure(n: usize) -> DensityMatrix {
        DensityMatrix::from_element(n, n, c(1.0 / n as f64))
    }

    #[test]
    fn entropy_examples() {
        assert!(
            von_neumann_entropy(&site_state(8, 1).unwrap())
                .unwrap()
                .abs()
                < 1e-12
        );
        assert!((von_neumann_entropy(&mixed(8)).unwrap() - 8f64.ln()).abs() < 1e-12);
        let mut half = DensityMatrix::zeros(8, 8);
        half[(0, 0)] = c(0.5);
        half[(1, 1)] = c(0.5);
        assert!((von_neumann_entropy(&half).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_clamping_window() {
        let mut rho = DensityMatrix::zeros(2, 2);
        rho[(0, 0)] = c(1.0 + 5e-10);
        rho[(1, 1)] = c(-5e-10);
        assert!(von_neumann_entropy(&rho).is_ok());
        rho[(0, 0)] = c(1.0 + 1e-6);
        rho[(1, 1)] = c(-1e-6);
        assert!(matches!(
            von_neumann_entropy(&rho),
            Err(Error::InvalidState { .. })
        ));
    }

    #[test]
    fn entanglement_examples() {
        assert!(
            global_entanglement(&site_state(8, 3).unwrap())
                .unwrap()
                .abs()
                < 1e-12
        );
        assert!(global_entanglement(&mixed(8)).unwrap().abs() < 1e-12);
        let e = global_entanglement(&uniform_pure(8)).unwrap();
        assert!((e - 8f64.ln()).abs() < 1e-10, "E = {e}");
        // The uniform superposition is rank one.
        let spectrum = clamped_spectrum(&uniform_pure(8)).unwrap();
        assert_eq!(spectrum.iter().filter(|&&p| p > 1e-12).count(), 1);
    }

    #[test]
    fn concurrence_examples() {
        let d = DensityMatrix::from_diagonal(&nalgebra::DVector::from_element(4, c(0.25)));
        assert_eq!(concurrence(&d, 1, 2).unwrap(), 0.0);
        let mut bell = DensityMatrix::zeros(8, 8);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            bell[(i, j)] = c(0.5);
        }
        assert!((concurrence(&bell, 1, 2).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(concurrence(&bell, 1, 3).unwrap(), 0.0);
        assert_eq!(concurrence(&uniform_pure(8), 5, 7).unwrap(), 0.25);
        assert!(matches!(
            concurrence(&bell, 2, 2),
            Err(Error::InvalidPair(2, 2))
        ));
        assert!(concurrence(&bell, 1, 9).is_err());
    }

    #[test]
    fn coherence_length_limits() {
        assert!((coherence_length(&mixed(8)).unwrap() - 1.0).abs() < 1e-12);
        assert!((coherence_length(&uniform_pure(8)).unwrap() - 8.0).abs() < 1e-12);
        assert!((coherence_length(&site_state(8, 4).unwrap()).unwrap() - 0.125).abs() < 1e-12);
        assert!(matches!(
            coherence_length(&DensityMatrix::zeros(3, 3)),
            Err(Error::UndefinedMeasure)
        ));
    }

    #[test]
    fn site_pair_parsing() {
        assert_eq!(
            "3,4".parse::<SitePair>().unwrap(),
            SitePair::new(4, 3).unwrap()
        );
        assert_eq!("2-3".parse::<SitePair>().unwrap().label(), "C_2_3");
        assert!("3,3".parse::<SitePair>().is_err());
        assert!("x".parse::<SitePair>().is_err());
    }

    fn two_state_trajectory() -> Trajectory {
        Trajectory {
            times: vec![0.0, 1.0, 2.0],
            states: vec![site_state(8, 1).unwrap(), uniform_pure(8), mixed(8)],
            meta: TrajectoryMeta::bare(8, 1.0),
        }
    }

    #[test]
    fn series_over_trajectory() {
        let traj = two_state_trajectory();
        let s = trajectory_measures(&traj, &default_pairs()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.global_entanglement[0], 0.0);
        assert!((s.global_entanglement[1] - 8f64.ln()).abs() < 1e-10);
        assert_eq!(
            s.concurrence(SitePair::new(3, 4).unwrap()).unwrap(),
            &[0.0, 0.25, 0.0]
        );
        assert!((s.coherence_length[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_reports_offending_index() {
        let mut traj = two_state_trajectory();
        traj.states[2][(0, 0)] = c(-0.1);
        traj.states[2][(1, 1)] = c(0.1 + 0.125);
        match trajectory_measures(&traj, &[]) {
            Err(Error::InvalidState {
                at_index: Some(2), ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn snapshots() {
        let traj = two_state_trajectory();
        let s = density_snapshot(&traj, 0.0, SNAPSHOT_THRESHOLD).unwrap();
        assert!(!s.off_grid);
        assert_eq!(s.below_threshold.iter().filter(|&&b| !b).count(), 1);
        assert!(!s.below_threshold[(0, 0)]);
        let s = density_snapshot(&traj, 0.0, 0.0).unwrap();
        assert!(s.below_threshold.iter().all(|&b| !b));
        let s = density_snapshot(&traj, 1.2, SNAPSHOT_THRESHOLD).unwrap();
        assert!(s.off_grid);
        assert_eq!(s.time, 1.0);
        assert!(s.to_table().contains("off-grid"));
    }

    fn arb_state(n: usize) -> impl Strategy<Value = DensityMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            let a = DensityMatrix::from_iterator(
                n,
                n,
                v.into_iter().map(|(re, im)| Complex64::new(re, im)),
            );
            let m = &a * a.adjoint();
            let tr = m.trace();
            m / tr
        })
    }

    proptest! {
        #[test]
        fn relabeling_invariance(rho in arb_state(5), shift in 1usize..5) {
            let n = 5;
            let perm: Vec<usize> = (0..n).map(|i| (i * 2 + shift) % n).collect();
            let permuted = DensityMatrix::from_fn(n, n, |i, j| rho[(perm[i], perm[j])]);
            let e = global_entanglement(&rho).unwrap();
            prop_assert!((e - global_entanglement(&permuted).unwrap()).abs() < 1e-9);
            prop_assert!((von_neumann_entropy(&rho).unwrap() - von_neumann_entropy(&permuted).unwrap()).abs() < 1e-9);
            prop_assert!((coherence_length(&rho).unwrap() - coherence_length(&permuted).unwrap()).abs() < 1e-12);
            // C on permuted (i, j) equals C on original (π(i), π(j)).
            prop_assert!((concurrence(&permuted, 1, 2).unwrap() - concurrence(&rho, perm[0] + 1, perm[1] + 1).unwrap()).abs() < 1e-15);
        }

        #[test]
        fn diagonal_states_are_unentangled(p in prop::collection::vec(0.0f64..1.0, 6)) {
            let total: f64 = p.iter().sum::<f64>().max(1e-3);
            let rho = DensityMatrix::from_diagonal(&nalgebra::DVector::from_iterator(6, p.iter().map(|x| c(x / total))));
            prop_assume!((rho.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(global_entanglement(&rho).unwrap().abs() < 1e-12);
        }

        #[test]
        fn bounds_hold(rho in arb_state(6)) {
            let n = 6.0_f64;
            let s = von_neumann_entropy(&rho).unwrap();
            prop_assert!(s >= -1e-12 && s <= n.ln() + 1e-9);
            let l = coherence_length(&rho).unwrap();
            prop_assert!(l >= 1.0 / n - 1e-12 && l <= n + 1e-12);
            prop_assert!(global_entanglement(&rho).unwrap() >= -1e-9);
            let c = concurrence(&rho, 2, 5).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
        }

        #[test]
        fn continuity(rho in arb_state(4), sigma in arb_state(4), eps in 0.0f64..1e-8) {
            // Convex mixing keeps the state valid; the Frobenius distance is ≤ 2·eps.
            let perturbed = &rho * c(1.0 - eps) + &sigma * c(eps);
            prop_assert!((global_entanglement(&rho).unwrap() - global_entanglement(&perturbed).unwrap()).abs() < 1e-6);
            prop_assert!((von_neumann_entropy(&rho).unwrap() - von_neumann_entropy(&perturbed).unwrap()).abs() < 1e-6);
            prop_assert!((coherence_length(&rho).unwrap() - coherence_length(&perturbed).unwrap()).abs() < 1e-6);
            prop_assert!((concurrence(&rho, 1, 3).unwrap() - concurrence(&perturbed, 1, 3).unwrap()).abs() < 1e-6);
        }
    }
}
