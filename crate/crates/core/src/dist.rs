//! Finitely supported probability distributions on `[0, 1]`.
//!
//! An [`EmpiricalDistribution`] stores its atoms as strictly increasing
//! locations together with the cumulative weight reached at each location.
//! The cumulative levels are kept verbatim (rather than re-summed from
//! weights) so that a level produced by one distribution's CDF can be fed to
//! another distribution's quantile function without drifting by an ulp. For
//! equal-weight samples the levels are exactly `count / len`.
//!
//! Quantiles use the left-continuous generalized inverse
//!
//! ```text
//! F^{-1}(p) = inf { x : F(x) >= p },   0 < p <= 1
//! ```
//!
//! with no interpolation between atoms.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Tolerance accepted on the total input weight before renormalization.
const WEIGHT_TOLERANCE: f64 = 1e-9;

/// A probability distribution with finitely many atoms in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    locations: Vec<f64>,
    levels: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Equal-weight distribution over `values`; repeated values merge into a
    /// single atom whose weight counts the repetitions.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("sample list"));
        }
        for &v in values {
            check_unit(v, "sample")?;
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);

        let total = sorted.len() as f64;
        let mut locations = Vec::new();
        let mut levels = Vec::new();
        for (i, &v) in sorted.iter().enumerate() {
            if locations.last() == Some(&v) {
                *levels.last_mut().unwrap() = (i + 1) as f64 / total;
            } else {
                locations.push(v);
                levels.push((i + 1) as f64 / total);
            }
        }
        Ok(Self { locations, levels })
    }

    /// Build from `(location, weight)` pairs. Locations are sorted and equal
    /// locations merged; the weights must be positive and sum to one.
    pub fn from_atoms<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::Empty("atom list"));
        }
        let mut total = 0.0;
        for &(x, w) in &atoms {
            check_unit(x, "atom location")?;
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidWeights(w));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidWeights(total));
        }
        atoms.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let mut locations = Vec::with_capacity(atoms.len());
        let mut levels = Vec::with_capacity(atoms.len());
        let mut running = 0.0;
        for (x, w) in atoms {
            running += w;
            if locations.last() == Some(&x) {
                *levels.last_mut().unwrap() = running / total;
            } else {
                locations.push(x);
                levels.push(running / total);
            }
        }
        *levels.last_mut().unwrap() = 1.0;
        Ok(Self { locations, levels })
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        check_unit(x, "point mass")?;
        Ok(Self {
            locations: vec![x],
            levels: vec![1.0],
        })
    }

    /// Materialize a step quantile function: `values[i]` is the quantile on
    /// `(levels[i-1], levels[i]]`. Adjacent equal values merge into one atom
    /// carrying the upper level.
    pub(crate) fn from_quantile_steps(levels: &[f64], values: &[f64]) -> Self {
        debug_assert_eq!(levels.len(), values.len());
        debug_assert!(!levels.is_empty());
        let mut locations: Vec<f64> = Vec::with_capacity(values.len());
        let mut out_levels: Vec<f64> = Vec::with_capacity(levels.len());
        for (&p, &v) in levels.iter().zip(values) {
            match locations.last() {
                // Rounding can leave a later value one ulp below an earlier one.
                Some(&last) if v <= last => *out_levels.last_mut().unwrap() = p,
                _ => {
                    locations.push(v);
                    out_levels.push(p);
                }
            }
        }
        *out_levels.last_mut().unwrap() = 1.0;
        Self {
            locations,
            levels: out_levels,
        }
    }

    /// Number of distinct atoms.
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn is_point_mass(&self) -> bool {
        self.locations.len() == 1
    }

    /// Atom locations, strictly increasing.
    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    /// Cumulative weight at each atom; the last level is exactly `1.0`.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels
            .iter()
            .scan(0.0, |prev, &p| {
                let w = p - *prev;
                *prev = p;
                Some(w)
            })
    }

    /// `(location, weight)` pairs in increasing location order.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.locations.iter().copied().zip(self.weights())
    }

    pub fn min(&self) -> f64 {
        self.locations[0]
    }

    pub fn max(&self) -> f64 {
        self.locations[self.locations.len() - 1]
    }

    /// Right-continuous CDF: total weight of atoms `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.locations.partition_point(|&loc| loc <= x);
        if idx == 0 {
            0.0
        } else {
            self.levels[idx - 1]
        }
    }

    /// Generalized inverse `inf { x : F(x) >= p }` for `p` in `(0, 1]`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidLevel(p));
        }
        Ok(self.step_quantile(p))
    }

    /// Quantile without range checking; levels above the last breakpoint
    /// resolve to the largest atom and levels at or below zero to the
    /// smallest.
    pub(crate) fn step_quantile(&self, p: f64) -> f64 {
        let idx = self.levels.partition_point(|&level| level < p);
        self.locations[idx.min(self.locations.len() - 1)]
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(x, w)| x * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.atoms()
            .map(|(x, w)| {
                let d = x - mean;
                w * d * d
            })
            .sum::<f64>()
            .max(0.0)
    }
}

fn check_unit(value: f64, context: &'static str) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfUnitInterval { value, context })
    }
}

/// Wasserstein-2 distance, integrating the squared difference of the two
/// step quantile functions exactly over the merged breakpoint partition.
pub fn w2_distance(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    w2_squared(a, b).sqrt()
}

pub(crate) fn w2_squared(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut prev = 0.0;
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        let (la, lb) = (a.levels[i], b.levels[j]);
        let next = la.min(lb);
        let diff = a.locations[i] - b.locations[j];
        acc += (next - prev) * diff * diff;
        prev = next;
        match la.partial_cmp(&lb).unwrap_or(Ordering::Equal) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Monotone transport map `F_target^{-1}(F_source(x))`.
///
/// Points below the source support have `F_source = 0`; they are sent to the
/// bottom of the target support, the right limit of the quantile at zero.
pub fn transport_map(
    source: &EmpiricalDistribution,
    target: &EmpiricalDistribution,
    x: f64,
) -> f64 {
    let p = source.cdf(x);
    if p <= 0.0 {
        target.min()
    } else {
        target.step_quantile(p)
    }
}

/// Push `d` forward through `f`. Weights travel with their atoms and merge
/// where `f` sends several atoms to the same point.
pub fn pushforward<F>(d: &EmpiricalDistribution, f: F) -> Result<EmpiricalDistribution>
where
    F: Fn(f64) -> Option<f64>,
{
    let mut moved = Vec::with_capacity(d.len());
    for (x, w) in d.atoms() {
        let y = f(x).ok_or(Error::UndefinedMap(x))?;
        moved.push((y, w));
    }
    EmpiricalDistribution::from_atoms(moved)
}

/// A step quantile function known on a sorted grid of probability levels.
///
/// `values[i]` is the quantile on `(levels[i-1], levels[i]]`. This is the
/// natural representation of an average of quantile functions before it is
/// materialized as atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileGrid {
    levels: Vec<f64>,
    values: Vec<f64>,
}

impl QuantileGrid {
    pub fn new(levels: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Empty("quantile grid"));
        }
        if levels.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} levels but {} values",
                levels.len(),
                values.len()
            )));
        }
        for &p in &levels {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidLevel(p));
            }
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("quantile grid levels must increase".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("quantile grid values must not decrease".into()));
        }
        Ok(Self { levels, values })
    }

    /// Pointwise average of the quantile functions of `dists`, tabulated on
    /// the union of their cumulative levels.
    ///
    /// Each quantile function changes value only at its own levels, so the
    /// total is assembled by a single sweep over all value changes. A change
    /// enters the compensated sum as the new value and the negated old value,
    /// both exact, rather than as a rounded difference.
    pub fn average(dists: &[EmpiricalDistribution]) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::Empty("distribution list"));
        }
        let n = dists.len() as f64;

        let shared = &dists[0].levels;
        if dists.iter().all(|d| d.levels == *shared) {
            let values = (0..shared.len())
                .map(|i| {
                    let mut total = CompensatedSum::default();
                    for d in dists {
                        total.add(d.locations[i]);
                    }
                    (total.value() / n).clamp(0.0, 1.0)
                })
                .collect();
            return Ok(Self {
                levels: shared.clone(),
                values,
            });
        }

        let mut base = CompensatedSum::default();
        let mut jumps: Vec<(f64, f64, f64)> = Vec::new();
        let mut levels: Vec<f64> = Vec::new();
        for d in dists {
            base.add(d.locations[0]);
            for i in 0..d.len() - 1 {
                jumps.push((d.levels[i], d.locations[i + 1], d.locations[i]));
            }
            levels.extend_from_slice(&d.levels);
        }
        levels.sort_unstable_by(f64::total_cmp);
        levels.dedup();
        jumps.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let mut values = Vec::with_capacity(levels.len());
        let mut total = base;
        let mut next_jump = 0;
        let mut previous = f64::NEG_INFINITY;
        for &p in &levels {
            // Left continuity: jumps sitting exactly at p apply above p.
            while next_jump < jumps.len() && jumps[next_jump].0 < p {
                total.add(jumps[next_jump].1);
                total.add(-jumps[next_jump].2);
                next_jump += 1;
            }
            let v = (total.value() / n).clamp(0.0, 1.0).max(previous);
            previous = v;
            values.push(v);
        }
        Ok(Self { levels, values })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Left-continuous evaluation at `p` in `(0, 1]`.
    pub fn evaluate(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidLevel(p));
        }
        let idx = self.levels.partition_point(|&level| level < p);
        Ok(self.values[idx.min(self.values.len() - 1)])
    }

    /// Turn the step function into atoms; fails if the values leave `[0, 1]`
    /// or the grid does not reach level one.
    pub fn to_distribution(&self) -> Result<EmpiricalDistribution> {
        for &v in &self.values {
            check_unit(v, "quantile value")?;
        }
        let top = *self.levels.last().unwrap();
        if (top - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidWeights(top));
        }
        Ok(EmpiricalDistribution::from_quantile_steps(
            &self.levels,
            &self.values,
        ))
    }
}

/// Neumaier summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> EmpiricalDistribution {
        EmpiricalDistribution::from_samples(&[0.2, 0.4, 0.4, 0.8]).unwrap()
    }

    #[test]
    fn from_samples_merges_duplicates() {
        let d = sample();
        let atoms: Vec<_> = d.atoms().collect();
        assert_eq!(atoms.len(), 3);
        let expected = [(0.2, 0.25), (0.4, 0.5), (0.8, 0.25)];
        for ((x, w), (ex, ew)) in atoms.iter().zip(expected) {
            assert_eq!(*x, ex);
            assert!((w - ew).abs() < 1e-15);
        }
        let single = EmpiricalDistribution::from_samples(&[0.5]).unwrap();
        assert_eq!(single.atoms().collect::<Vec<_>>(), vec![(0.5, 1.0)]);
    }

    #[test]
    fn from_samples_rejects_bad_input() {
        assert!(matches!(
            EmpiricalDistribution::from_samples(&[]),
            Err(Error::Empty(_))
        ));
        assert!(EmpiricalDistribution::from_samples(&[0.3, 1.2]).is_err());
        assert!(EmpiricalDistribution::from_samples(&[f64::NAN]).is_err());
        assert!(EmpiricalDistribution::from_samples(&[-0.0001]).is_err());
    }

    #[test]
    fn from_atoms_validates_weights() {
        assert!(EmpiricalDistribution::from_atoms([(0.1, 0.5), (0.2, 0.4)]).is_err());
        assert!(EmpiricalDistribution::from_atoms([(0.1, 1.5), (0.2, -0.5)]).is_err());
        let d = EmpiricalDistribution::from_atoms([(0.7, 0.25), (0.1, 0.5), (0.7, 0.25)]).unwrap();
        assert_eq!(d.locations(), &[0.1, 0.7]);
        assert_eq!(d.levels(), &[0.5, 1.0]);
    }

    #[test]
    fn cdf_counts_weight_at_or_below() {
        let d = sample();
        assert_eq!(d.cdf(0.3), 0.25);
        assert_eq!(d.cdf(0.4), 0.75);
        assert_eq!(d.cdf(1.0), 1.0);
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.cdf(0.1999), 0.0);
    }

    #[test]
    fn quantile_is_left_continuous_inverse() {
        let d = sample();
        assert_eq!(d.quantile(0.25).unwrap(), 0.2);
        assert_eq!(d.quantile(0.26).unwrap(), 0.4);
        assert_eq!(d.quantile(0.75).unwrap(), 0.4);
        assert_eq!(d.quantile(1.0).unwrap(), 0.8);
        assert!(matches!(d.quantile(0.0), Err(Error::InvalidLevel(_))));
        assert!(d.quantile(1.01).is_err());
    }

    #[test]
    fn w2_examples() {
        let a = EmpiricalDistribution::point_mass(0.3).unwrap();
        let b = EmpiricalDistribution::point_mass(0.7).unwrap();
        assert!((w2_distance(&a, &b) - 0.4).abs() < 1e-12);

        let bernoulli = EmpiricalDistribution::from_samples(&[0.0, 1.0]).unwrap();
        let half = EmpiricalDistribution::point_mass(0.5).unwrap();
        assert!((w2_distance(&bernoulli, &half) - 0.5).abs() < 1e-12);

        let d = sample();
        assert_eq!(w2_distance(&d, &d), 0.0);
    }

    #[test]
    fn transport_map_matches_ranks() {
        let source = EmpiricalDistribution::from_samples(&[0.1, 0.5, 0.9]).unwrap();
        let target = EmpiricalDistribution::from_samples(&[0.2, 0.4, 0.6]).unwrap();
        assert_eq!(transport_map(&source, &target, 0.5), 0.4);
        assert_eq!(transport_map(&source, &target, 0.1), 0.2);
        assert_eq!(transport_map(&source, &target, 0.9), 0.6);
        assert_eq!(transport_map(&source, &target, 0.0), 0.2);
        for &x in source.locations() {
            assert_eq!(transport_map(&source, &source, x), x);
        }
    }

    #[test]
    fn moments() {
        let delta = EmpiricalDistribution::point_mass(0.5).unwrap();
        assert_eq!(delta.mean(), 0.5);
        assert_eq!(delta.variance(), 0.0);

        let bernoulli = EmpiricalDistribution::from_samples(&[0.0, 1.0]).unwrap();
        assert!((bernoulli.mean() - 0.5).abs() < 1e-15);
        assert!((bernoulli.variance() - 0.25).abs() < 1e-15);

        assert!((sample().mean() - 0.45).abs() < 1e-15);
    }

    #[test]
    fn pushforward_examples() {
        let d = sample();
        assert_eq!(pushforward(&d, Some).unwrap(), d);

        let constant = pushforward(&d, |_| Some(0.3)).unwrap();
        assert_eq!(constant, EmpiricalDistribution::point_mass(0.3).unwrap());

        let bernoulli = EmpiricalDistribution::from_samples(&[0.0, 1.0]).unwrap();
        let flipped = pushforward(&bernoulli, |x| Some(1.0 - x)).unwrap();
        assert_eq!(flipped, bernoulli);

        let partial = pushforward(&d, |x| (x < 0.5).then_some(x));
        assert!(matches!(partial, Err(Error::UndefinedMap(x)) if x == 0.8));
    }

    #[test]
    fn quantile_grid_average_of_two() {
        let a = EmpiricalDistribution::from_samples(&[0.0, 1.0]).unwrap();
        let b = EmpiricalDistribution::from_samples(&[0.2, 0.6]).unwrap();
        let grid = QuantileGrid::average(&[a, b]).unwrap();
        assert_eq!(grid.levels(), &[0.5, 1.0]);
        assert!((grid.values()[0] - 0.1).abs() < 1e-15);
        assert!((grid.values()[1] - 0.8).abs() < 1e-15);
        assert!(QuantileGrid::average(&[]).is_err());
    }

    #[test]
    fn quantile_grid_rejects_malformed() {
        assert!(QuantileGrid::new(vec![0.5, 0.4], vec![0.1, 0.2]).is_err());
        assert!(QuantileGrid::new(vec![0.5, 1.0], vec![0.3, 0.2]).is_err());
        assert!(QuantileGrid::new(vec![0.5], vec![0.3, 0.2]).is_err());
        let partial = QuantileGrid::new(vec![0.5], vec![0.3]).unwrap();
        assert!(partial.to_distribution().is_err());
    }

    fn arb_dist(max_atoms: usize) -> impl Strategy<Value = EmpiricalDistribution> {
        prop::collection::vec((0.0f64..=1.0, 0.05f64..1.0), 1..=max_atoms).prop_map(|raw| {
            let total: f64 = raw.iter().map(|(_, w)| w).sum();
            EmpiricalDistribution::from_atoms(raw.into_iter().map(|(x, w)| (x, w / total)))
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn galois_pair(d in arb_dist(12), p in 0.0001f64..=1.0) {
            let q = d.quantile(p).unwrap();
            prop_assert!(d.cdf(q) >= p - 1e-12);
            for &x in d.locations() {
                let back = d.quantile(d.cdf(x)).unwrap();
                prop_assert!(back <= x);
                prop_assert_eq!(back, x);
            }
        }

        #[test]
        fn w2_symmetry_and_triangle(a in arb_dist(20), b in arb_dist(20), c in arb_dist(20)) {
            let ab = w2_distance(&a, &b);
            prop_assert_eq!(ab, w2_distance(&b, &a));
            prop_assert!(w2_distance(&a, &c) <= ab + w2_distance(&b, &c) + 1e-9);
            prop_assert!(w2_distance(&a, &a) == 0.0);
        }

        #[test]
        fn transport_is_monotone_and_pushes_onto_target(
            src in prop::collection::vec(0.0f64..=1.0, 1..15),
            tgt in prop::collection::vec(0.0f64..=1.0, 1..15),
        ) {
            // Same atom count and equal weights: atom-for-atom pushforward.
            let n = src.len().min(tgt.len());
            let mut s = src[..n].to_vec();
            let t = &tgt[..n];
            s.sort_by(f64::total_cmp);
            s.dedup();
            let t: Vec<f64> = t.iter().copied().take(s.len()).collect();
            let source = EmpiricalDistribution::from_samples(&s).unwrap();
            let target = EmpiricalDistribution::from_samples(&t).unwrap();
            let pushed = pushforward(&source, |x| Some(transport_map(&source, &target, x))).unwrap();
            prop_assert_eq!(pushed.locations(), target.locations());
            for (a, b) in pushed.levels().iter().zip(target.levels()) {
                prop_assert!((a - b).abs() < 1e-12);
            }

            let mut last = f64::NEG_INFINITY;
            for k in 0..=100 {
                let y = transport_map(&source, &target, k as f64 / 100.0);
                prop_assert!(y >= last);
                last = y;
            }
        }
    }
}
