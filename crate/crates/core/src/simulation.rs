//! Synthetic data from the linear scale-and-reverse model and Monte Carlo
//! experiments.
//!
//! Items are the atoms `x_j` of an equal-weight measure `mu` and user `k`
//! rates item `x` as `phi_k(x) = alpha_k (x - 1/2) + 1/2`. A positive
//! `alpha_k` is an honest user with their own spread, a negative one a
//! contrarian.
//!
//! Every replication owns a generator derived from `(seed, n, replication)`,
//! so results do not depend on the number of worker threads.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF};

use crate::barycenter::frechet_mean;
use crate::dist::EmpiricalDistribution;
use crate::error::{Error, Result};
use crate::estimators::{aggregate, l2_loss, padded_ids, table, Aggregate, CompleteRatings, EstimatorTag, ScoreTable};
use crate::incomplete::{incomplete_aggregate, SparseRatings};
use crate::output::{csv_bytes, format_number};

/// Largest `|alpha|` for which ratings of atoms in `[1/4, 3/4]` stay in
/// `[0, 1]`.
pub const ALPHA_BOUND: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomSupport {
    /// `M` midpoints of equal cells of `[1/4, 3/4]`.
    UniformGrid(usize),
    Explicit(Vec<f64>),
}

impl AtomSupport {
    pub fn atoms(&self) -> Result<Vec<f64>> {
        let atoms = match self {
            AtomSupport::UniformGrid(m) => {
                let m = *m;
                (0..m)
                    .map(|j| 0.25 + (j as f64 + 0.5) / (2.0 * m as f64))
                    .collect()
            }
            AtomSupport::Explicit(v) => {
                let mut v = v.clone();
                v.sort_by(f64::total_cmp);
                v
            }
        };
        if atoms.len() < 2 {
            return Err(Error::TooFewItems {
                required: 2,
                got: atoms.len(),
            });
        }
        if atoms.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("atom locations must be distinct".into()));
        }
        if let Some(&bad) = atoms.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::OutOfUnitInterval {
                value: bad,
                context: "atom",
            });
        }
        Ok(atoms)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaLaw {
    /// User `k` gets `alphas[k % alphas.len()]`.
    Deterministic(Vec<f64>),
    /// `alpha = +1` with probability `p_plus`, else `-1`.
    TwoPoint { p_plus: f64 },
    /// `alpha = eps Z` with `P(eps = 1) = p_plus` and `Z` normal with the
    /// given mean and variance, truncated to `|Z| <= 2`. The location of `Z`
    /// is shifted so that the truncated `E|Z|` equals `mean`.
    GaussianSign {
        p_plus: f64,
        mean: f64,
        variance: f64,
    },
}

impl AlphaLaw {
    /// The scaling and biased reversal law used in the simulated-data
    /// experiment: `Z ~ N(1, 1/16)`, `P(eps = 1) = 3/4`.
    pub fn section85() -> Self {
        AlphaLaw::GaussianSign {
            p_plus: 0.75,
            mean: 1.0,
            variance: 1.0 / 16.0,
        }
    }

    /// Largest possible `|alpha|`.
    fn sup_abs(&self) -> f64 {
        match self {
            AlphaLaw::Deterministic(v) => v.iter().fold(0.0, |m, a| m.max(a.abs())),
            AlphaLaw::TwoPoint { .. } => 1.0,
            AlphaLaw::GaussianSign { .. } => ALPHA_BOUND,
        }
    }
}

/// Draws from an [`AlphaLaw`], with the truncation correction precomputed.
#[derive(Debug, Clone)]
pub struct AlphaSampler {
    law: AlphaLaw,
    normal: Option<Normal<f64>>,
    location: f64,
}

impl AlphaSampler {
    pub fn new(law: &AlphaLaw) -> Result<Self> {
        let (normal, location) = match law {
            AlphaLaw::Deterministic(v) => {
                if v.is_empty() || v.iter().any(|a| !a.is_finite()) {
                    return Err(Error::Config("deterministic alpha list must be finite and nonempty".into()));
                }
                (None, f64::NAN)
            }
            AlphaLaw::TwoPoint { p_plus } => {
                check_probability(*p_plus)?;
                (None, f64::NAN)
            }
            AlphaLaw::GaussianSign {
                p_plus,
                mean,
                variance,
            } => {
                check_probability(*p_plus)?;
                if !(*variance > 0.0) || !variance.is_finite() {
                    return Err(Error::Config(format!("variance {variance} must be positive")));
                }
                let sd = variance.sqrt();
                let location = corrected_location(*mean, sd)?;
                let normal = Normal::new(location, sd)
                    .map_err(|e| Error::Config(format!("normal law: {e}")))?;
                (Some(normal), location)
            }
        };
        Ok(Self {
            law: law.clone(),
            normal,
            location,
        })
    }

    /// Location of the untruncated normal after correcting for truncation,
    /// `NaN` for laws without a normal part.
    pub fn location(&self) -> f64 {
        self.location
    }

    /// `alpha` of user `k`.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> f64 {
        match &self.law {
            AlphaLaw::Deterministic(v) => v[k % v.len()],
            AlphaLaw::TwoPoint { p_plus } => {
                if rng.gen_bool(*p_plus) {
                    1.0
                } else {
                    -1.0
                }
            }
            AlphaLaw::GaussianSign { p_plus, .. } => {
                let sign = if rng.gen_bool(*p_plus) { 1.0 } else { -1.0 };
                let normal = self.normal.as_ref().expect("normal part");
                loop {
                    let z: f64 = normal.sample(rng);
                    if z.abs() <= ALPHA_BOUND {
                        return sign * z;
                    }
                }
            }
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("probability {p} outside [0, 1]")))
    }
}

/// `E|Z|` for `Z ~ N(location, sd^2)` conditioned on `|Z| <= 2`.
fn truncated_abs_mean(location: f64, sd: f64) -> f64 {
    let std = statrs::distribution::Normal::new(0.0, 1.0).expect("standard normal");
    let z = |x: f64| (x - location) / sd;
    // Integral of x times the density over [c, d].
    let moment = |c: f64, d: f64| {
        location * (std.cdf(z(d)) - std.cdf(z(c))) + sd * (std.pdf(z(c)) - std.pdf(z(d)))
    };
    let mass = std.cdf(z(ALPHA_BOUND)) - std.cdf(z(-ALPHA_BOUND));
    (moment(0.0, ALPHA_BOUND) - moment(-ALPHA_BOUND, 0.0)) / mass
}

fn corrected_location(target: f64, sd: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, ALPHA_BOUND);
    let f = |m: f64| truncated_abs_mean(m, sd) - target;
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::Config(format!(
            "no location gives truncated E|Z| = {target} with sd {sd}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub atoms: AtomSupport,
    pub users: usize,
    pub alpha: AlphaLaw,
    pub replications: usize,
    pub seed: u64,
}

impl SimulationConfig {
    /// Checks the configuration and returns the atom locations.
    pub fn validate(&self) -> Result<Vec<f64>> {
        let atoms = self.atoms.atoms()?;
        if self.users == 0 {
            return Err(Error::Config("need at least one user".into()));
        }
        let reach = atoms.iter().fold(0.0f64, |m, x| m.max((x - 0.5).abs()));
        if self.alpha.sup_abs() * reach > 0.5 + 1e-12 {
            return Err(Error::Config(format!(
                "alpha up to {} with atoms {reach} from 1/2 gives ratings outside [0, 1]",
                self.alpha.sup_abs()
            )));
        }
        AlphaSampler::new(&self.alpha)?;
        Ok(atoms)
    }

    fn with_users(&self, users: usize) -> Self {
        Self {
            users,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentConfig {
    /// Raters drawn uniformly at random for every item.
    pub raters_per_item: usize,
}

/// Generator for replication `replication` of an experiment with `n` users.
pub fn replication_rng(seed: u64, n: usize, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) ^ replication as u64);
    rng
}

/// True scores of the atoms as a score table.
pub fn truth_table(atoms: &[f64]) -> ScoreTable {
    table(padded_ids("x", atoms.len()), atoms.to_vec(), EstimatorTag::Average)
}

/// Complete ratings and the true item scores, drawn from `rng`.
pub fn generate_complete_with<R: Rng + ?Sized>(
    config: &SimulationConfig,
    rng: &mut R,
) -> Result<(CompleteRatings, ScoreTable)> {
    let atoms = config.validate()?;
    let sampler = AlphaSampler::new(&config.alpha)?;
    let mut values = Vec::with_capacity(config.users * atoms.len());
    for k in 0..config.users {
        let alpha = sampler.sample(k, rng);
        values.extend(atoms.iter().map(|x| (alpha * (x - 0.5) + 0.5).clamp(0.0, 1.0)));
    }
    let truth = truth_table(&atoms);
    let data = CompleteRatings::new(
        padded_ids("u", config.users),
        truth.items().to_vec(),
        values,
    )?;
    Ok((data, truth))
}

/// [`generate_complete_with`] using the configured seed.
pub fn generate_complete(config: &SimulationConfig) -> Result<(CompleteRatings, ScoreTable)> {
    generate_complete_with(config, &mut replication_rng(config.seed, config.users, 0))
}

/// Complete generation followed by a uniformly random set of raters for
/// every item, drawn independently of the profiles. Users who end up rating
/// nothing are dropped.
pub fn generate_incomplete_with<R: Rng + ?Sized>(
    config: &SimulationConfig,
    assignment: AssignmentConfig,
    rng: &mut R,
) -> Result<(SparseRatings, ScoreTable)> {
    let q = assignment.raters_per_item;
    if q == 0 || q > config.users {
        return Err(Error::Config(format!(
            "raters per item {q} must lie in 1..={}",
            config.users
        )));
    }
    let (complete, truth) = generate_complete_with(config, rng)?;
    if q == config.users {
        return Ok((complete.to_sparse(), truth));
    }
    let n = complete.user_count();
    let m = complete.item_count();
    let mut rated = vec![false; n * m];
    for j in 0..m {
        for k in sample(rng, n, q) {
            rated[k * m + j] = true;
        }
    }
    let mut users = Vec::new();
    let mut triples = Vec::new();
    for k in 0..n {
        let row = complete.row(k);
        let before = triples.len();
        for j in 0..m {
            if rated[k * m + j] {
                triples.push((users.len(), j, row[j]));
            }
        }
        if triples.len() > before {
            users.push(complete.users()[k].clone());
        }
    }
    let data = SparseRatings::from_indexed(users, complete.items().to_vec(), triples)?;
    Ok((data, truth))
}

pub fn generate_incomplete(
    config: &SimulationConfig,
    assignment: AssignmentConfig,
) -> Result<(SparseRatings, ScoreTable)> {
    generate_incomplete_with(
        config,
        assignment,
        &mut replication_rng(config.seed, config.users, 0),
    )
}

/// Monte Carlo estimate of the consensus curve
/// `g(x) = E[F_mu^{-1}(F_1(phi_1(x)))]` on the atoms.
///
/// Under the linear model the transported rating of atom `x_j` depends only
/// on the sign of `alpha`: it is `x_j` for `alpha > 0`, the mirrored atom
/// `x_{M+1-j}` for `alpha < 0`, and the top atom for `alpha = 0`.
pub fn consensus_curve(config: &SimulationConfig, draws: usize, seed: u64) -> Result<Vec<f64>> {
    let atoms = config.validate()?;
    if draws == 0 {
        return Err(Error::Config("need at least one draw".into()));
    }
    let sampler = AlphaSampler::new(&config.alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut plus, mut minus, mut zero) = (0usize, 0usize, 0usize);
    for k in 0..draws {
        let a = sampler.sample(k, &mut rng);
        if a > 0.0 {
            plus += 1;
        } else if a < 0.0 {
            minus += 1;
        } else {
            zero += 1;
        }
    }
    let d = draws as f64;
    let (pp, pm, pz) = (plus as f64 / d, minus as f64 / d, zero as f64 / d);
    let m = atoms.len();
    let top = atoms[m - 1];
    Ok((0..m)
        .map(|j| pp * atoms[j] + pm * atoms[m - 1 - j] + pz * top)
        .collect())
}

/// Smallest gap `g(y) - g(x)` between neighbouring atoms `x < y`; negative
/// when the consensus order is violated.
pub fn consensus_gap(config: &SimulationConfig, draws: usize, seed: u64) -> Result<f64> {
    let g = consensus_curve(config, draws, seed)?;
    Ok(g.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min))
}

/// Raters per item needed for the incomplete-data bound,
/// `ceil(64 ln(n) / delta^2)` capped at `n`.
pub fn required_raters(delta: f64, n: usize) -> usize {
    if !(delta > 0.0) {
        return n;
    }
    let q = (64.0 / (delta * delta) * (n as f64).ln()).ceil();
    if q >= n as f64 {
        n
    } else {
        (q as usize).max(1)
    }
}

/// Standard deviation of the uniform probability measure on `[1/4, 3/4]`.
pub const MU_SD: f64 = 0.144_337_567_297_406_43;

/// One line of an experiment table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub label: String,
    pub n: usize,
    pub replications: usize,
    pub mean_loss: f64,
    pub sd_loss: f64,
    pub bound: Option<f64>,
}

impl ExperimentRow {
    fn from_samples(label: &str, n: usize, samples: &[f64], bound: Option<f64>) -> Self {
        let (mean_loss, sd_loss) = mean_sd(samples);
        Self {
            label: label.to_string(),
            n,
            replications: samples.len(),
            mean_loss,
            sd_loss,
            bound,
        }
    }
}

pub(crate) fn mean_sd(samples: &[f64]) -> (f64, f64) {
    let r = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / r;
    let sd = if samples.len() > 1 {
        (samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// CSV with columns `label,n,replications,mean_loss,sd_loss,bound_if_any`.
pub fn experiment_csv(rows: &[ExperimentRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &["label", "n", "replications", "mean_loss", "sd_loss", "bound_if_any"],
        rows.iter().map(|r| {
            vec![
                r.label.clone(),
                r.n.to_string(),
                r.replications.to_string(),
                format_number(r.mean_loss),
                format_number(r.sd_loss),
                r.bound.map(format_number).unwrap_or_default(),
            ]
        }),
    )
}

/// Least-squares slope of `ln(mean_loss)` against `ln(n)`.
pub fn loglog_slope(rows: &[ExperimentRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.mean_loss.ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn pick<'a>(agg: &'a Aggregate, tag: EstimatorTag) -> Result<&'a ScoreTable> {
    match tag {
        EstimatorTag::Average => Ok(&agg.average),
        EstimatorTag::Primitive => Ok(&agg.primitive),
        EstimatorTag::Rating => Ok(&agg.rating),
        EstimatorTag::Btl => Err(Error::Config("btl is not a rating estimator".into())),
    }
}

fn check_replications(r: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::Config("need at least two replications".into()));
    }
    Ok(())
}

/// Mean `L2(mu)` loss of each estimator in `tags` for every `n` in `ladder`,
/// on complete data. The bound column holds `1/(2 sqrt n) + 4M e^{-n delta^2/8}`
/// for the rating estimator, with `delta` from [`consensus_gap`].
pub fn convergence_experiment(
    config: &SimulationConfig,
    ladder: &[usize],
    tags: &[EstimatorTag],
) -> Result<Vec<ExperimentRow>> {
    check_replications(config.replications)?;
    let m = config.validate()?.len() as f64;
    let delta = consensus_gap(config, GAP_DRAWS, config.seed)?;
    let mut rows = Vec::new();
    for &n in ladder {
        let cfg = config.with_users(n);
        cfg.validate()?;
        let losses: Vec<Vec<f64>> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let (data, truth) = generate_complete_with(&cfg, &mut replication_rng(cfg.seed, n, r))?;
                let agg = aggregate(&data);
                tags.iter()
                    .map(|&t| l2_loss(pick(&agg, t)?, &truth))
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (i, &tag) in tags.iter().enumerate() {
            let samples: Vec<f64> = losses.iter().map(|l| l[i]).collect();
            let bound = (tag == EstimatorTag::Rating && delta > 0.0).then(|| {
                let nf = n as f64;
                0.5 / nf.sqrt() + 4.0 * m * (-nf * delta * delta / 8.0).exp()
            });
            rows.push(ExperimentRow::from_samples(tag.as_str(), n, &samples, bound));
        }
    }
    Ok(rows)
}

/// Auxiliary draws used to estimate the consensus gap.
pub const GAP_DRAWS: usize = 100_000;

/// Mean `L2(mu)` loss on incomplete data with `ceil(64 ln n / delta^2)`
/// raters per item (capped at `n`). The bound column holds `7M / sqrt n`.
pub fn incomplete_rate_experiment(
    config: &SimulationConfig,
    ladder: &[usize],
    tags: &[EstimatorTag],
) -> Result<Vec<ExperimentRow>> {
    check_replications(config.replications)?;
    let m = config.validate()?.len() as f64;
    let delta = consensus_gap(config, GAP_DRAWS, config.seed)?;
    let mut rows = Vec::new();
    for &n in ladder {
        let cfg = config.with_users(n);
        cfg.validate()?;
        let assignment = AssignmentConfig {
            raters_per_item: required_raters(delta, n),
        };
        let losses: Vec<Vec<f64>> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let (data, truth) =
                    generate_incomplete_with(&cfg, assignment, &mut replication_rng(cfg.seed, n, r))?;
                let agg = incomplete_aggregate(&data);
                tags.iter()
                    .map(|&t| l2_loss(pick(&agg, t)?, &truth))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let bound = 7.0 * m / (n as f64).sqrt();
        for (i, &tag) in tags.iter().enumerate() {
            let samples: Vec<f64> = losses.iter().map(|l| l[i]).collect();
            rows.push(ExperimentRow::from_samples(tag.as_str(), n, &samples, Some(bound)));
        }
    }
    Ok(rows)
}

/// Losses under the linear model with the given alphas, over the
/// continuous uniform probability `mu` on `[1/4, 3/4]`: `(A, R0, R)`.
///
/// Every estimator is affine, `E(x) = s (x - 1/2) + 1/2`, so its loss is
/// `|s - 1|` times the standard deviation `c = 1/(4 sqrt 3)` of `mu`:
/// `||A - id|| = c |mean(alpha) - 1|`,
/// `||R0 - id|| = c |mean|alpha| mean(sgn alpha) - 1|` and, when the
/// contrarians are a minority, `||R - id|| = c |mean|alpha| - 1|`.
pub fn linear_model_losses(alphas: &[f64]) -> (f64, f64, f64) {
    let c = MU_SD;
    let n = alphas.len() as f64;
    let mean = alphas.iter().sum::<f64>() / n;
    let mean_abs = alphas.iter().map(|a| a.abs()).sum::<f64>() / n;
    let mean_sign = alphas.iter().map(|a| a.signum()).sum::<f64>() / n;
    (
        c * (mean - 1.0).abs(),
        c * (mean_abs * mean_sign - 1.0).abs(),
        c * (mean_abs - 1.0).abs(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormCheck {
    pub estimator: EstimatorTag,
    pub loss: f64,
    pub closed_form: f64,
}

/// The three-user example `alpha = (1.2, 0.8, -1.0)` on a grid of `m` atoms.
pub fn example51(m: usize) -> Result<Vec<ClosedFormCheck>> {
    let alphas = vec![1.2, 0.8, -1.0];
    let config = SimulationConfig {
        atoms: AtomSupport::UniformGrid(m),
        users: alphas.len(),
        alpha: AlphaLaw::Deterministic(alphas.clone()),
        replications: 1,
        seed: 0,
    };
    let (data, truth) = generate_complete(&config)?;
    let agg = aggregate(&data);
    let (a, r0, r) = linear_model_losses(&alphas);
    Ok(vec![
        ClosedFormCheck {
            estimator: EstimatorTag::Average,
            loss: l2_loss(&agg.average, &truth)?,
            closed_form: a,
        },
        ClosedFormCheck {
            estimator: EstimatorTag::Primitive,
            loss: l2_loss(&agg.primitive, &truth)?,
            closed_form: r0,
        },
        ClosedFormCheck {
            estimator: EstimatorTag::Rating,
            loss: l2_loss(&agg.rating, &truth)?,
            closed_form: r,
        },
    ])
}

pub fn closed_form_csv(rows: &[ClosedFormCheck]) -> Result<Vec<u8>> {
    csv_bytes(
        &["estimator", "loss", "closed_form"],
        rows.iter().map(|r| {
            vec![
                r.estimator.to_string(),
                format_number(r.loss),
                format_number(r.closed_form),
            ]
        }),
    )
}

/// Per-replication losses of the three estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicationLosses {
    pub replication: usize,
    pub average: f64,
    pub primitive: f64,
    pub rating: f64,
}

/// The simulated-data comparison: `M = 500` grid atoms, `n = 200` users,
/// 100 replications of the [`AlphaLaw::section85`] law.
pub fn section85_config(seed: u64) -> SimulationConfig {
    SimulationConfig {
        atoms: AtomSupport::UniformGrid(500),
        users: 200,
        alpha: AlphaLaw::section85(),
        replications: 100,
        seed,
    }
}

pub fn replication_losses(config: &SimulationConfig) -> Result<Vec<ReplicationLosses>> {
    config.validate()?;
    (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = replication_rng(config.seed, config.users, r);
            let (data, truth) = generate_complete_with(config, &mut rng)?;
            let agg = aggregate(&data);
            Ok(ReplicationLosses {
                replication: r,
                average: l2_loss(&agg.average, &truth)?,
                primitive: l2_loss(&agg.primitive, &truth)?,
                rating: l2_loss(&agg.rating, &truth)?,
            })
        })
        .collect()
}

pub fn replication_csv(rows: &[ReplicationLosses]) -> Result<Vec<u8>> {
    csv_bytes(
        &["replication", "loss_avg", "loss_primitive", "loss_rating"],
        rows.iter().map(|r| {
            vec![
                r.replication.to_string(),
                format_number(r.average),
                format_number(r.primitive),
                format_number(r.rating),
            ]
        }),
    )
}

/// Law of a random measure `Lambda` on `[0, 1]`, given through its quantile
/// function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureLaw {
    /// `F_Lambda^{-1}(p) = p^theta` with `theta ~ U[a, b]`, `0 < a < b`.
    Power { a: f64, b: f64 },
    /// `Lambda` fixed with quantile `p^theta`.
    Degenerate { theta: f64 },
}

impl MeasureLaw {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MeasureLaw::Power { a, b } => a > 0.0 && a < b && b.is_finite(),
            MeasureLaw::Degenerate { theta } => theta > 0.0 && theta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid measure law {self:?}")))
        }
    }

    fn draw_exponent<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            MeasureLaw::Power { a, b } => rng.gen_range(a..b),
            MeasureLaw::Degenerate { theta } => theta,
        }
    }

    /// Quantile of the population barycenter, `E[F_Lambda^{-1}(p)]`.
    pub fn barycenter_quantile(&self, p: f64) -> f64 {
        if p >= 1.0 {
            return 1.0;
        }
        if p <= 0.0 {
            return 0.0;
        }
        match *self {
            MeasureLaw::Power { a, b } => (p.powf(b) - p.powf(a)) / ((b - a) * p.ln()),
            MeasureLaw::Degenerate { theta } => p.powf(theta),
        }
    }

    /// CDF of the population barycenter, inverting the quantile by bisection.
    pub fn barycenter_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.barycenter_quantile(mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Probability levels used to represent and compare quantile functions.
pub const GC_LEVELS: usize = 10_000;

/// Barycenter of `n` draws of `law`. Each draw is represented by its
/// quantile values at the levels `i / GC_LEVELS`, where the step quantile of
/// the representation agrees with the continuous one exactly.
fn sample_barycenter<R: Rng + ?Sized>(law: &MeasureLaw, n: usize, rng: &mut R) -> Result<EmpiricalDistribution> {
    let log_levels: Vec<f64> = gc_levels().map(f64::ln).collect();
    let dists: Vec<EmpiricalDistribution> = (0..n)
        .map(|_| {
            let theta = law.draw_exponent(rng);
            let values: Vec<f64> = log_levels.iter().map(|l| (theta * l).exp()).collect();
            EmpiricalDistribution::from_samples(&values)
        })
        .collect::<Result<_>>()?;
    Ok(frechet_mean(&dists)?.into_distribution())
}

fn gc_levels() -> impl Iterator<Item = f64> {
    (1..=GC_LEVELS).map(|i| i as f64 / GC_LEVELS as f64)
}

/// `sup_p |F_hat^{-1}(p) - F^{-1}(p)|` over the level grid.
fn quantile_sup(law: &MeasureLaw, bary: &EmpiricalDistribution) -> f64 {
    gc_levels()
        .map(|p| (bary.step_quantile(p) - law.barycenter_quantile(p)).abs())
        .fold(0.0, f64::max)
}

/// `sup_x |F_hat(x) - F(x)|`, evaluated at the atoms of the sample
/// barycenter from both sides of each jump.
fn cdf_sup(law: &MeasureLaw, bary: &EmpiricalDistribution) -> f64 {
    let mut below = 0.0;
    let mut sup = 0.0f64;
    for (&x, &level) in bary.locations().iter().zip(bary.levels()) {
        let f = law.barycenter_cdf(x);
        sup = sup.max((f - below).abs()).max((f - level).abs());
        below = level;
    }
    sup
}

fn gc_table<F>(law: &MeasureLaw, ladder: &[usize], replications: usize, seed: u64, bound: bool, stat: F) -> Result<Vec<ExperimentRow>>
where
    F: Fn(&MeasureLaw, &EmpiricalDistribution) -> f64 + Sync,
{
    law.validate()?;
    if replications == 0 {
        return Err(Error::Config("need at least one replication".into()));
    }
    ladder
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::Config("sample size must be positive".into()));
            }
            let samples: Vec<f64> = (0..replications)
                .into_par_iter()
                .map(|r| {
                    let bary = sample_barycenter(law, n, &mut replication_rng(seed, n, r))?;
                    Ok(stat(law, &bary))
                })
                .collect::<Result<_>>()?;
            let nf = n as f64;
            let b = bound.then(|| 4.0 * (nf.ln() / nf).sqrt());
            Ok(ExperimentRow::from_samples("quantile_sup", n, &samples, b))
        })
        .collect()
}

/// Mean sup distance between sample and population barycenter quantile
/// functions, next to the bound `4 sqrt(ln n / n)`.
pub fn gc_experiment(law: &MeasureLaw, ladder: &[usize], replications: usize, seed: u64) -> Result<Vec<ExperimentRow>> {
    gc_table(law, ladder, replications, seed, true, quantile_sup)
}

/// Mean sup distance between sample and population barycenter CDFs.
pub fn cdf_gc_experiment(law: &MeasureLaw, ladder: &[usize], replications: usize, seed: u64) -> Result<Vec<ExperimentRow>> {
    let mut rows = gc_table(law, ladder, replications, seed, false, cdf_sup)?;
    for r in &mut rows {
        r.label = "cdf_sup".into();
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(alpha: AlphaLaw, m: usize, n: usize) -> SimulationConfig {
        SimulationConfig {
            atoms: AtomSupport::UniformGrid(m),
            users: n,
            alpha,
            replications: 4,
            seed: 5,
        }
    }

    #[test]
    fn honest_users_report_truth() {
        let (data, truth) = generate_complete(&config(AlphaLaw::Deterministic(vec![1.0]), 7, 4)).unwrap();
        let agg = aggregate(&data);
        for t in [&agg.average, &agg.primitive, &agg.rating] {
            for (a, b) in t.scores().iter().zip(truth.scores()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn all_reversed_users_reverse_the_order() {
        let (data, truth) = generate_complete(&config(AlphaLaw::Deterministic(vec![-1.0]), 5, 3)).unwrap();
        let rating = aggregate(&data).rating;
        let s = rating.scores();
        assert!(s.windows(2).all(|w| w[0] > w[1]));
        assert!((s[0] - truth.scores()[4]).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        let wide = SimulationConfig {
            atoms: AtomSupport::Explicit(vec![0.0, 1.0]),
            ..config(AlphaLaw::Deterministic(vec![1.5]), 2, 2)
        };
        assert!(generate_complete(&wide).is_err());
        assert!(generate_complete(&config(AlphaLaw::Deterministic(vec![3.0]), 4, 2)).is_err());
        assert!(generate_complete(&config(AlphaLaw::TwoPoint { p_plus: 1.5 }, 4, 2)).is_err());
        assert!(generate_complete(&config(AlphaLaw::Deterministic(vec![1.0]), 1, 2)).is_err());
    }

    #[test]
    fn seeds_are_reproducible() {
        let c = config(AlphaLaw::section85(), 30, 20);
        assert_eq!(generate_complete(&c).unwrap(), generate_complete(&c).unwrap());
        let other = SimulationConfig { seed: 6, ..c.clone() };
        assert_ne!(generate_complete(&c).unwrap().0, generate_complete(&other).unwrap().0);
    }

    #[test]
    fn truncation_keeps_mean_abs_at_target() {
        let sampler = AlphaSampler::new(&AlphaLaw::GaussianSign {
            p_plus: 1.0,
            mean: 1.0,
            variance: 0.5,
        })
        .unwrap();
        assert!((sampler.location() - 1.0).abs() < 0.3, "{}", sampler.location());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws = 400_000;
        let mean: f64 = (0..draws).map(|k| sampler.sample(k, &mut rng).abs()).sum::<f64>() / draws as f64;
        assert!((mean - 1.0).abs() < 5e-3, "{mean}");
        assert!((truncated_abs_mean(sampler.location(), 0.5f64.sqrt()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_assignment_matches_complete() {
        let c = config(AlphaLaw::section85(), 6, 5);
        let (sparse, t1) = generate_incomplete(&c, AssignmentConfig { raters_per_item: 5 }).unwrap();
        let (dense, t2) = generate_complete(&c).unwrap();
        assert_eq!(sparse, dense.to_sparse());
        assert_eq!(t1, t2);
    }

    #[test]
    fn single_rater_per_item() {
        let c = config(AlphaLaw::section85(), 12, 5);
        let (sparse, _) = generate_incomplete(&c, AssignmentConfig { raters_per_item: 1 }).unwrap();
        assert_eq!(sparse.len(), 12);
        for x in 0..sparse.item_count() {
            assert_eq!(sparse.item_rating_count(x), 1);
        }
        assert_eq!(incomplete_aggregate(&sparse).rating.len(), 12);
        assert!(generate_incomplete(&c, AssignmentConfig { raters_per_item: 6 }).is_err());
        assert!(generate_incomplete(&c, AssignmentConfig { raters_per_item: 0 }).is_err());
    }

    #[test]
    fn consensus_gap_of_sign_laws() {
        let c = config(AlphaLaw::TwoPoint { p_plus: 0.75 }, 20, 10);
        let delta = consensus_gap(&c, GAP_DRAWS, 3).unwrap();
        // Neighbouring atoms are 1/40 apart; g compresses gaps by 2P(+) - 1.
        assert!((delta - 0.5 / 40.0).abs() < 2e-4, "{delta}");
        let contrarian = config(AlphaLaw::Deterministic(vec![-1.0]), 4, 1);
        assert!(consensus_gap(&contrarian, 10, 0).unwrap() < 0.0);
        assert_eq!(required_raters(0.0125, 50), 50);
        assert_eq!(required_raters(10.0, 1000), 5);
    }

    #[test]
    fn closed_forms_of_linear_model() {
        let (a, r0, r) = linear_model_losses(&[1.2, 0.8, -1.0]);
        let c = (1.0f64 / 48.0).sqrt();
        assert!((MU_SD - c).abs() < 1e-16);
        assert!((a - c * 2.0 / 3.0).abs() < 1e-15);
        assert!((r0 - c * 2.0 / 3.0).abs() < 1e-15);
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn example51_on_small_grid() {
        for row in example51(400).unwrap() {
            assert!((row.loss - row.closed_form).abs() < 5e-3, "{row:?}");
        }
    }

    #[test]
    fn barycenter_of_power_law() {
        let law = MeasureLaw::Power { a: 0.5, b: 2.0 };
        // Average of p^theta over theta in [0.5, 2] at p = 1/2.
        let expected = (0.5f64.powf(2.0) - 0.5f64.powf(0.5)) / (1.5 * 0.5f64.ln());
        assert!((law.barycenter_quantile(0.5) - expected).abs() < 1e-15);
        let x = law.barycenter_quantile(0.3);
        assert!((law.barycenter_cdf(x) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn degenerate_law_has_no_error() {
        let law = MeasureLaw::Degenerate { theta: 1.5 };
        for row in gc_experiment(&law, &[1, 4], 2, 0).unwrap() {
            assert!(row.mean_loss < 1e-12);
        }
        for row in cdf_gc_experiment(&law, &[1, 4], 2, 0).unwrap() {
            assert!(row.mean_loss < 2e-4);
        }
    }

    #[test]
    fn gc_distances_are_bounded() {
        let law = MeasureLaw::Power { a: 0.5, b: 2.0 };
        let rows = gc_experiment(&law, &[1, 5], 3, 9).unwrap();
        assert!(rows.iter().all(|r| r.mean_loss <= 1.0));
        assert!((4.0 * (1000f64.ln() / 1000.0).sqrt() - 0.3325).abs() < 1e-4);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let rows: Vec<ExperimentRow> = [10usize, 100, 1000]
            .iter()
            .map(|&n| ExperimentRow::from_samples("x", n, &[1.0 / (n as f64).sqrt()], None))
            .collect();
        assert!((loglog_slope(&rows) + 0.5).abs() < 1e-12);
    }
}
