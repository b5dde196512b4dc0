//! Consensus item scores from ratings given on personal scales.
//!
//! Every user rates on their own scale. Treating each user's ratings as a
//! distribution on `[0, 1]`, ratings are moved onto a common scale, the
//! Wasserstein-2 barycenter of all users' distributions, by the monotone
//! transport map from the user's distribution, then averaged per item
//! ([`estimators::primitive_scores`]). A final monotone rescaling pushes the
//! averaged scores back onto the barycenter ([`estimators::rating_scores`]).
//!
//! Modules:
//!
//! - [`dist`]: finitely supported distributions, quantiles, W2 distance,
//!   monotone transport maps.
//! - [`barycenter`]: W2 Fréchet means via quantile averaging.
//! - [`estimators`]: complete-data average, primitive, and rating estimators,
//!   plus the order/scale split of L2 loss.
//! - [`incomplete`]: the same estimators when each item is rated by a subset
//!   of users.
//! - [`concordance`]: Kendall's W and its rating generalizations.
//! - [`evaluation`]: rankings, rank distance, pairwise majorities, utilities
//!   and a Rank Centrality comparator.
//! - [`simulation`]: synthetic generators and Monte Carlo experiments.
//! - [`ingest`]: CSV loading, scale normalization, filtering, histograms.
//! - [`cli`]: the batch command-line frontend behind the `transport-ratings`
//!   binary.

pub mod barycenter;
pub mod cli;
pub mod concordance;
pub mod dist;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod incomplete;
pub mod ingest;
mod output;
pub mod simulation;

pub use barycenter::{frechet_functional, frechet_mean, Barycenter};
pub use dist::{pushforward, transport_map, w2_distance, EmpiricalDistribution, QuantileGrid};
pub use error::{Error, Result};
pub use estimators::{CompleteRatings, EstimatorTag, LossDecomposition, ScoreTable};
pub use evaluation::{PairwiseCounts, Ranking};
pub use incomplete::SparseRatings;
pub use ingest::ScaleSpec;
pub use output::format_number;
