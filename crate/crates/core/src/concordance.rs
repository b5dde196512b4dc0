//! Concordance statistics.
//!
//! Kendall's W compares the spread of the average ranks to the spread of a
//! single ranking. With ranks converted to ratings the same ratio becomes
//! `Var(A_* mu) / mean_i Var(mu_i)`, which suggests two statistics for
//! arbitrary ratings:
//!
//! * `w_scale = Var(barycenter) / mean_i Var(mu_i)`, agreement of the users'
//!   rating scales;
//! * `w_ratings = Var((R0)_* mu) / mean_i Var(mu_i)`, agreement of the
//!   users' full rating profiles.
//!
//! Both lie in `[0, 1]`; `w_ratings` equals Kendall's W on rank data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{aggregate, Aggregate, CompleteRatings};
use crate::incomplete::{incomplete_aggregate, user_empirical_distributions, SparseRatings};
use crate::simulation::{AlphaLaw, AlphaSampler};

/// Rank `k` of `M` becomes the rating `1 - (k - 1) / M`.
pub fn ranks_to_ratings(ranks: &[usize]) -> Result<Vec<f64>> {
    check_permutation(ranks)?;
    let m = ranks.len() as f64;
    Ok(ranks.iter().map(|&k| 1.0 - (k - 1) as f64 / m).collect())
}

pub(crate) fn check_permutation(ranks: &[usize]) -> Result<()> {
    let m = ranks.len();
    let mut seen = vec![false; m];
    for &k in ranks {
        if k == 0 || k > m {
            return Err(Error::NotPermutation {
                len: m,
                detail: format!("rank {k} out of range"),
            });
        }
        if std::mem::replace(&mut seen[k - 1], true) {
            return Err(Error::NotPermutation {
                len: m,
                detail: format!("rank {k} repeated"),
            });
        }
    }
    Ok(())
}

/// Classical coefficient of concordance of `n` rankings of `M` items. Each
/// row must be a strict permutation of `1..=M`; tied ranks are rejected.
pub fn kendalls_w(rank_matrix: &[Vec<usize>]) -> Result<f64> {
    let first = rank_matrix.first().ok_or(Error::Empty("rank matrix"))?;
    let m = first.len();
    if m < 2 {
        return Err(Error::TooFewItems { required: 2, got: m });
    }
    for row in rank_matrix {
        if row.len() != m {
            return Err(Error::Shape(format!(
                "ranking of length {} among rankings of length {m}",
                row.len()
            )));
        }
        check_permutation(row)?;
    }
    let n = rank_matrix.len() as f64;
    let mf = m as f64;
    let grand_mean = (mf + 1.0) / 2.0;
    let spread: f64 = (0..m)
        .map(|j| {
            let mean_rank = rank_matrix.iter().map(|row| row[j] as f64).sum::<f64>() / n;
            (mean_rank - grand_mean).powi(2)
        })
        .sum::<f64>()
        / mf;
    Ok(spread / ((mf * mf - 1.0) / 12.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceReport {
    pub w_scale: f64,
    pub w_ratings: f64,
    pub per_user_variance: Vec<f64>,
    pub barycenter_variance: f64,
    pub primitive_pushforward_variance: f64,
}

impl ConcordanceReport {
    pub fn mean_user_variance(&self) -> f64 {
        self.per_user_variance.iter().sum::<f64>() / self.per_user_variance.len() as f64
    }

    fn assemble(per_user_variance: Vec<f64>, agg: &Aggregate) -> Result<Self> {
        let denominator =
            per_user_variance.iter().sum::<f64>() / per_user_variance.len() as f64;
        if denominator <= 0.0 {
            return Err(Error::ZeroVariance(
                "every user gives a single rating value",
            ));
        }
        let barycenter_variance = agg.barycenter.distribution().variance();
        let primitive_pushforward_variance = agg.primitive.distribution()?.variance();
        Ok(Self {
            w_scale: (barycenter_variance / denominator).min(1.0),
            w_ratings: (primitive_pushforward_variance / denominator).min(1.0),
            per_user_variance,
            barycenter_variance,
            primitive_pushforward_variance,
        })
    }
}

/// Concordance of a complete rating matrix.
pub fn concordance_report(data: &CompleteRatings) -> Result<ConcordanceReport> {
    let per_user = data
        .user_distributions()
        .iter()
        .map(|d| d.variance())
        .collect();
    ConcordanceReport::assemble(per_user, &aggregate(data))
}

/// Concordance on sparse data, using each user's empirical distribution and
/// the sparse primitive scores.
pub fn concordance_report_sparse(data: &SparseRatings) -> Result<ConcordanceReport> {
    let per_user = user_empirical_distributions(data)
        .iter()
        .map(|d| d.variance())
        .collect();
    ConcordanceReport::assemble(per_user, &incomplete_aggregate(data))
}

/// Large-population values of `(w_scale, w_ratings)` for the linear
/// scale-and-reverse model `phi(x) = alpha (x - 1/2) + 1/2` with symmetric
/// item scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcordanceLimits {
    pub w_scale: f64,
    pub w_ratings: f64,
    pub mean_abs_alpha: f64,
    pub mean_sign: f64,
    pub mean_alpha_sq: f64,
}

/// Monte Carlo estimate of the limits over `draws` samples of the alpha law.
///
/// For `n` users the statistics equal `mean|a|^2 / mean(a^2)` and
/// `mean|a|^2 mean(sgn a)^2 / mean(a^2)`, so the limits are
/// `E|a|^2 / E[a^2]` and `E|a|^2 E[sgn a]^2 / E[a^2]`.
pub fn concordance_limits(law: &AlphaLaw, draws: usize, seed: u64) -> Result<ConcordanceLimits> {
    if draws == 0 {
        return Err(Error::Config("need at least one draw".into()));
    }
    let sampler = AlphaSampler::new(law)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut abs, mut sign, mut sq) = (0.0, 0.0, 0.0);
    for k in 0..draws {
        let a = sampler.sample(k, &mut rng);
        abs += a.abs();
        sign += sgn(a);
        sq += a * a;
    }
    let d = draws as f64;
    let (mean_abs_alpha, mean_sign, mean_alpha_sq) = (abs / d, sign / d, sq / d);
    if mean_alpha_sq <= 0.0 {
        return Err(Error::ZeroVariance("alpha law concentrated at zero"));
    }
    let scale = mean_abs_alpha * mean_abs_alpha / mean_alpha_sq;
    Ok(ConcordanceLimits {
        w_scale: scale,
        w_ratings: scale * mean_sign * mean_sign,
        mean_abs_alpha,
        mean_sign,
        mean_alpha_sq,
    })
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
