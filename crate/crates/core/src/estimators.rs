//! Aggregate rating rules on a complete user × item rating matrix.
//!
//! * `average`: the per-item mean of raw ratings.
//! * `primitive`: each rating is moved from its user's distribution onto the
//!   barycenter of all users' distributions by the monotone transport map,
//!   then averaged per item.
//! * `rating`: the primitive scores pushed by one more monotone map from
//!   their own distribution onto the barycenter.
//!
//! When every user orders the items the same way the three rules coincide.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barycenter::{frechet_mean, Barycenter};
use crate::dist::{w2_distance, EmpiricalDistribution};
use crate::error::{Error, Result};
use crate::incomplete::SparseRatings;

/// Dense ratings in `[0, 1]`, one row per user.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteRatings {
    users: Vec<String>,
    items: Vec<String>,
    values: Vec<f64>,
}

impl CompleteRatings {
    /// `values` is row-major: `values[k * items.len() + j]` is user `k`'s
    /// rating of item `j`.
    pub fn new(users: Vec<String>, items: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::Empty("user list"));
        }
        if items.is_empty() {
            return Err(Error::Empty("item list"));
        }
        if values.len() != users.len() * items.len() {
            return Err(Error::Shape(format!(
                "{} values for {} users x {} items",
                values.len(),
                users.len(),
                items.len()
            )));
        }
        check_unique(&users, "user")?;
        check_unique(&items, "item")?;
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfUnitInterval {
                    value: v,
                    context: "rating",
                });
            }
        }
        Ok(Self {
            users,
            items,
            values,
        })
    }

    /// Rows of ratings with generated identifiers `u0..`, `i0..` padded so
    /// that lexicographic and numeric order agree.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::Shape(format!(
                "ragged rows: expected {m} ratings, found {}",
                bad.len()
            )));
        }
        Self::new(
            padded_ids("u", rows.len()),
            padded_ids("i", m),
            rows.concat(),
        )
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn row(&self, user: usize) -> &[f64] {
        let m = self.items.len();
        &self.values[user * m..(user + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.items.len())
    }

    pub fn get(&self, user: usize, item: usize) -> f64 {
        self.values[user * self.items.len() + item]
    }

    /// Each user's rating distribution across all items.
    pub fn user_distributions(&self) -> Vec<EmpiricalDistribution> {
        self.rows()
            .map(|row| EmpiricalDistribution::from_samples(row).expect("validated ratings"))
            .collect()
    }

    pub fn to_sparse(&self) -> SparseRatings {
        let m = self.items.len();
        let triples = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &v)| (idx / m, idx % m, v));
        SparseRatings::from_indexed(self.users.clone(), self.items.clone(), triples)
            .expect("dense data is a valid sparse data set")
    }
}

pub(crate) fn padded_ids(prefix: &str, count: usize) -> Vec<String> {
    let width = count.saturating_sub(1).to_string().len();
    (0..count).map(|i| format!("{prefix}{i:0width$}")).collect()
}

pub(crate) fn check_unique(ids: &[String], kind: &str) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::Config(format!("duplicate {kind} identifier {id:?}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorTag {
    #[serde(rename = "avg")]
    Average,
    Primitive,
    Rating,
    /// Rank Centrality stationary probabilities.
    Btl,
}

impl EstimatorTag {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorTag::Average => "avg",
            EstimatorTag::Primitive => "primitive",
            EstimatorTag::Rating => "rating",
            EstimatorTag::Btl => "btl",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "avg" | "average" => Some(EstimatorTag::Average),
            "primitive" => Some(EstimatorTag::Primitive),
            "rating" => Some(EstimatorTag::Rating),
            "btl" => Some(EstimatorTag::Btl),
            _ => None,
        }
    }
}

impl fmt::Display for EstimatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Item scores produced by one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    items: Vec<String>,
    scores: Vec<f64>,
    tag: EstimatorTag,
}

impl ScoreTable {
    pub fn new(items: Vec<String>, scores: Vec<f64>, tag: EstimatorTag) -> Result<Self> {
        if items.len() != scores.len() {
            return Err(Error::Shape(format!(
                "{} items but {} scores",
                items.len(),
                scores.len()
            )));
        }
        check_unique(&items, "item")?;
        for &s in &scores {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::OutOfUnitInterval {
                    value: s,
                    context: "score",
                });
            }
        }
        Ok(Self { items, scores, tag })
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn tag(&self) -> EstimatorTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, item: &str) -> Option<f64> {
        self.items
            .iter()
            .position(|i| i == item)
            .map(|idx| self.scores[idx])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.items
            .iter()
            .map(String::as_str)
            .zip(self.scores.iter().copied())
    }

    /// Distribution of scores with every item weighted equally.
    pub fn distribution(&self) -> Result<EmpiricalDistribution> {
        EmpiricalDistribution::from_samples(&self.scores)
    }

    /// Scores reordered to follow `items`.
    pub(crate) fn aligned_to(&self, items: &[String]) -> Result<Vec<f64>> {
        if self.items.len() != items.len() {
            return Err(Error::ItemMismatch(format!(
                "{} items vs {}",
                self.items.len(),
                items.len()
            )));
        }
        if self.items == items {
            return Ok(self.scores.clone());
        }
        let index: HashMap<&str, usize> = self
            .items
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        items
            .iter()
            .map(|id| {
                index
                    .get(id.as_str())
                    .map(|&i| self.scores[i])
                    .ok_or_else(|| Error::ItemMismatch(format!("item {id:?} missing")))
            })
            .collect()
    }
}

/// All three complete-data estimates, sharing one barycenter.
#[derive(Debug, Clone)]
pub struct Aggregate {
    pub barycenter: Barycenter,
    pub average: ScoreTable,
    pub primitive: ScoreTable,
    pub rating: ScoreTable,
}

pub fn aggregate(data: &CompleteRatings) -> Aggregate {
    let dists = data.user_distributions();
    let barycenter = frechet_mean(&dists).expect("at least one user");

    let m = data.item_count();
    let n = data.user_count() as f64;

    let transported: Vec<Vec<f64>> = data
        .rows()
        .zip(&dists)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(row, dist)| {
            row.iter()
                .map(|&r| barycenter.quantile_at(dist.cdf(r)))
                .collect()
        })
        .collect();

    let mut average = vec![0.0; m];
    let mut primitive = vec![0.0; m];
    for (row, moved) in data.rows().zip(&transported) {
        for j in 0..m {
            average[j] += row[j];
            primitive[j] += moved[j];
        }
    }
    for j in 0..m {
        average[j] = (average[j] / n).clamp(0.0, 1.0);
        primitive[j] = (primitive[j] / n).clamp(0.0, 1.0);
    }
    let rating = rescale_onto(&barycenter, &primitive);

    let items = data.items().to_vec();
    Aggregate {
        average: table(items.clone(), average, EstimatorTag::Average),
        primitive: table(items.clone(), primitive, EstimatorTag::Primitive),
        rating: table(items, rating, EstimatorTag::Rating),
        barycenter,
    }
}

/// Push `primitive` from its own equal-weight distribution onto the
/// barycenter. Tied primitive scores share the top of their quantile block.
pub(crate) fn rescale_onto(barycenter: &Barycenter, primitive: &[f64]) -> Vec<f64> {
    let nu = EmpiricalDistribution::from_samples(primitive).expect("scores in [0, 1]");
    primitive
        .iter()
        .map(|&s| barycenter.quantile_at(nu.cdf(s)))
        .collect()
}

pub(crate) fn table(items: Vec<String>, scores: Vec<f64>, tag: EstimatorTag) -> ScoreTable {
    ScoreTable::new(items, scores, tag).expect("estimator output is a valid score table")
}

/// Per-item mean of the raw ratings.
pub fn average_scores(data: &CompleteRatings) -> ScoreTable {
    let n = data.user_count() as f64;
    let mut sums = vec![0.0; data.item_count()];
    for row in data.rows() {
        for (s, r) in sums.iter_mut().zip(row) {
            *s += r;
        }
    }
    let scores = sums.into_iter().map(|s| (s / n).clamp(0.0, 1.0)).collect();
    table(data.items().to_vec(), scores, EstimatorTag::Average)
}

/// `R0(x) = (1/n) sum_k F_bary^{-1}(F_k(r_kx))`.
pub fn primitive_scores(data: &CompleteRatings) -> ScoreTable {
    aggregate(data).primitive
}

/// `R(x) = F_bary^{-1}(F_nu(R0(x)))` with `nu` the distribution of primitive
/// scores.
pub fn rating_scores(data: &CompleteRatings) -> ScoreTable {
    aggregate(data).rating
}

/// Split of the L2 estimation error into a scale part and an order part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossDecomposition {
    /// `||E - id||` in `L2(mu)`.
    pub total: f64,
    /// `W2(E_* mu, mu)`: the error left after reordering estimates optimally.
    pub scale_term: f64,
    /// `sqrt(total^2 - scale_term^2)`.
    pub order_term: f64,
}

/// Root-mean-square error of `estimated` against `truth` over the items,
/// every item weighted equally.
pub fn l2_loss(estimated: &ScoreTable, truth: &ScoreTable) -> Result<f64> {
    let est = estimated.aligned_to(truth.items())?;
    Ok(rms(&est, truth.scores()))
}

pub(crate) fn rms(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (sum / a.len() as f64).sqrt()
}

/// Order/scale decomposition of the loss of `estimated` against `truth`,
/// with `mu` the equal-weight distribution of the items' true scores.
pub fn loss_decomposition(estimated: &ScoreTable, truth: &ScoreTable) -> Result<LossDecomposition> {
    let est = estimated.aligned_to(truth.items())?;
    let t = truth.scores();
    let total = rms(&est, t);

    let mu = EmpiricalDistribution::from_samples(t)?;
    let pushed = EmpiricalDistribution::from_samples(&est)?;
    let scale_term = w2_distance(&pushed, &mu);

    // total^2 - W2^2 reduces to (2/M) sum_j E_j (sigma_j - t_j), where sigma
    // is the rank-matching rearrangement; this form is exactly zero when the
    // estimate already has the right order.
    let sigma = rearrangement(&est, t);
    let cross: f64 = est
        .iter()
        .zip(sigma.iter().zip(t))
        .map(|(e, (s, x))| e * (s - x))
        .sum();
    let order_sq = (2.0 * cross / t.len() as f64).max(0.0);

    Ok(LossDecomposition {
        total,
        scale_term,
        order_term: order_sq.sqrt(),
    })
}

/// The measure-preserving rearrangement of the true scores that matches the
/// order of `estimated`: the item with the k-th smallest estimate receives
/// the k-th smallest true score. Ties keep the true-score order.
pub fn order_rearrangement(estimated: &ScoreTable, truth: &ScoreTable) -> Result<ScoreTable> {
    let est = estimated.aligned_to(truth.items())?;
    let sigma = rearrangement(&est, truth.scores());
    ScoreTable::new(truth.items().to_vec(), sigma, truth.tag())
}

fn rearrangement(est: &[f64], truth: &[f64]) -> Vec<f64> {
    let mut by_estimate: Vec<usize> = (0..est.len()).collect();
    by_estimate.sort_by(|&a, &b| {
        est[a]
            .total_cmp(&est[b])
            .then(truth[a].total_cmp(&truth[b]))
            .then(a.cmp(&b))
    });
    let mut sorted_truth = truth.to_vec();
    sorted_truth.sort_by(f64::total_cmp);
    let mut sigma = vec![0.0; est.len()];
    for (rank, &item) in by_estimate.iter().enumerate() {
        sigma[item] = sorted_truth[rank];
    }
    sigma
}
