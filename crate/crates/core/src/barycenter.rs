//! Wasserstein-2 Fréchet means on the line.
//!
//! On `[0, 1]` the W2 barycenter of `mu_1, ..., mu_n` is the measure whose
//! quantile function is the average `(1/n) sum_k F_k^{-1}`. The average of
//! step quantile functions is again a step function whose breakpoints are the
//! union of the inputs' cumulative levels, so the barycenter is materialized
//! exactly on that grid.

use crate::dist::{w2_squared, EmpiricalDistribution, QuantileGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Barycenter {
    distribution: EmpiricalDistribution,
    source_count: usize,
}

impl Barycenter {
    pub fn distribution(&self) -> &EmpiricalDistribution {
        &self.distribution
    }

    pub fn into_distribution(self) -> EmpiricalDistribution {
        self.distribution
    }

    pub fn source_count(&self) -> usize {
        self.source_count
    }

    /// Quantile of the barycenter at a level reached by one of the sources'
    /// CDFs.
    pub(crate) fn quantile_at(&self, p: f64) -> f64 {
        self.distribution.step_quantile(p)
    }
}

/// Equal-weight W2 Fréchet mean of `dists`.
pub fn frechet_mean(dists: &[EmpiricalDistribution]) -> Result<Barycenter> {
    if dists.is_empty() {
        return Err(Error::Empty("distribution list"));
    }
    let grid = QuantileGrid::average(dists)?;
    Ok(Barycenter {
        distribution: grid.to_distribution()?,
        source_count: dists.len(),
    })
}

/// Mean squared W2 distance from `candidate` to each of `dists`.
pub fn frechet_functional(
    candidate: &EmpiricalDistribution,
    dists: &[EmpiricalDistribution],
) -> Result<f64> {
    if dists.is_empty() {
        return Err(Error::Empty("distribution list"));
    }
    let total: f64 = dists.iter().map(|d| w2_squared(d, candidate)).sum();
    Ok(total / dists.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::w2_distance;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn samples(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::from_samples(v).unwrap()
    }

    #[test]
    fn point_masses_average() {
        let bary = frechet_mean(&[samples(&[0.2]), samples(&[0.6])]).unwrap();
        assert_eq!(bary.distribution().len(), 1);
        assert!((bary.distribution().min() - 0.4).abs() < 1e-15);
        assert_eq!(bary.source_count(), 2);
    }

    #[test]
    fn two_atom_inputs() {
        let bary = frechet_mean(&[samples(&[0.0, 1.0]), samples(&[0.2, 0.6])]).unwrap();
        let atoms: Vec<_> = bary.distribution().atoms().collect();
        assert_eq!(atoms.len(), 2);
        assert!((atoms[0].0 - 0.1).abs() < 1e-15 && (atoms[0].1 - 0.5).abs() < 1e-15);
        assert!((atoms[1].0 - 0.8).abs() < 1e-15 && (atoms[1].1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_input_is_returned() {
        let d = samples(&[0.1, 0.3, 0.3, 0.9]);
        let bary = frechet_mean(std::slice::from_ref(&d)).unwrap();
        assert_eq!(bary.distribution(), &d);
        assert!(frechet_mean(&[]).is_err());
    }

    #[test]
    fn functional_examples() {
        let dists = [samples(&[0.0]), samples(&[1.0])];
        let half = samples(&[0.5]);
        assert!((frechet_functional(&half, &dists).unwrap() - 0.25).abs() < 1e-15);
        let d = samples(&[0.2, 0.7]);
        assert_eq!(frechet_functional(&d, std::slice::from_ref(&d)).unwrap(), 0.0);
        assert!(frechet_functional(&d, &[]).is_err());
    }

    #[test]
    fn unequal_atom_counts_use_union_grid() {
        let a = samples(&[0.1, 0.5, 0.9]);
        let b = samples(&[0.2, 0.8]);
        let bary = frechet_mean(&[a.clone(), b.clone()]).unwrap();
        // Union of {1/3, 2/3, 1} and {1/2, 1}.
        assert_eq!(bary.distribution().len(), 4);
        for p in [0.1, 1.0 / 3.0, 0.4, 0.5, 0.6, 2.0 / 3.0, 0.9, 1.0] {
            let expected = 0.5 * (a.quantile(p).unwrap() + b.quantile(p).unwrap());
            let got = bary.distribution().quantile(p).unwrap();
            assert!((got - expected).abs() < 1e-15, "p={p}");
        }
    }

    fn random_dist(rng: &mut ChaCha8Rng, max_atoms: usize) -> EmpiricalDistribution {
        let k = rng.gen_range(1..=max_atoms);
        let raw: Vec<(f64, f64)> = (0..k).map(|_| (rng.gen(), rng.gen_range(0.05..1.0))).collect();
        let total: f64 = raw.iter().map(|a| a.1).sum();
        EmpiricalDistribution::from_atoms(raw.into_iter().map(|(x, w)| (x, w / total))).unwrap()
    }

    #[test]
    fn mean_beats_jittered_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(1..=10);
            let dists: Vec<_> = (0..n).map(|_| random_dist(&mut rng, 10)).collect();
            let bary = frechet_mean(&dists).unwrap();
            let best = frechet_functional(bary.distribution(), &dists).unwrap();
            for _ in 0..100 {
                let jittered = bary
                    .distribution()
                    .atoms()
                    .map(|(x, w)| ((x + rng.gen_range(-0.05..=0.05)).clamp(0.0, 1.0), w));
                let candidate = EmpiricalDistribution::from_atoms(jittered).unwrap();
                let value = frechet_functional(&candidate, &dists).unwrap();
                assert!(best <= value + 1e-12, "{best} > {value}");
            }
        }
    }

    proptest! {
        #[test]
        fn quantile_is_average_on_merged_grid(
            raw in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 1..8), 1..6)
        ) {
            let dists: Vec<_> = raw.iter().map(|v| samples(v)).collect();
            let bary = frechet_mean(&dists).unwrap();
            let mut levels: Vec<f64> = dists.iter().flat_map(|d| d.levels().to_vec()).collect();
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            for p in levels {
                let expected: f64 = dists.iter().map(|d| d.quantile(p).unwrap()).sum::<f64>()
                    / dists.len() as f64;
                prop_assert!((bary.distribution().quantile(p).unwrap() - expected).abs() < 1e-12);
            }
        }

        #[test]
        fn translation_equivariance(
            raw in prop::collection::vec(prop::collection::vec(0.0f64..=0.7, 1..8), 1..6),
            shift in 0.0f64..0.3,
        ) {
            let dists: Vec<_> = raw.iter().map(|v| samples(v)).collect();
            let shifted: Vec<_> = raw
                .iter()
                .map(|v| samples(&v.iter().map(|x| x + shift).collect::<Vec<_>>()))
                .collect();
            let a = frechet_mean(&dists).unwrap();
            let b = frechet_mean(&shifted).unwrap();
            prop_assert_eq!(a.distribution().len(), b.distribution().len());
            for (x, y) in a.distribution().locations().iter().zip(b.distribution().locations()) {
                prop_assert!((x + shift - y).abs() < 1e-12);
            }
        }

        #[test]
        fn idempotent_on_copies(v in prop::collection::vec(0.0f64..=1.0, 1..10), n in 1usize..8) {
            let d = samples(&v);
            let copies = vec![d.clone(); n];
            let bary = frechet_mean(&copies).unwrap();
            prop_assert!(w2_distance(bary.distribution(), &d) < 1e-12);
            prop_assert_eq!(bary.distribution().levels(), d.levels());
        }
    }
}
