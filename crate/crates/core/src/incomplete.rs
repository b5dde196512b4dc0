//! Estimators for sparse ratings, where item `x` is rated only by the users
//! in `N_x`.
//!
//! Each user's scale is the equal-weight distribution of the ratings they
//! actually gave. The barycenter averages the quantile functions of all
//! users, and an item's primitive score averages the transported ratings of
//! its own raters only.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::barycenter::frechet_mean;
use crate::dist::EmpiricalDistribution;
use crate::error::{Error, Result};
use crate::estimators::{check_unique, rescale_onto, table, Aggregate, CompleteRatings, ScoreTable};
use crate::estimators::EstimatorTag;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: usize,
    pub item: usize,
    pub value: f64,
}

/// `(user, item, rating)` triples with per-user and per-item indexes.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRatings {
    users: Vec<String>,
    items: Vec<String>,
    entries: Vec<Rating>,
    by_user: Vec<Vec<usize>>,
    by_item: Vec<Vec<usize>>,
}

impl SparseRatings {
    /// Build from index triples into `users` and `items`. Every user and
    /// every item must carry at least one rating and no pair may repeat.
    pub fn from_indexed<I>(users: Vec<String>, items: Vec<String>, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        check_unique(&users, "user")?;
        check_unique(&items, "item")?;
        let mut by_user = vec![Vec::new(); users.len()];
        let mut by_item = vec![Vec::new(); items.len()];
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (user, item, value) in triples {
            if user >= users.len() || item >= items.len() {
                return Err(Error::Shape(format!(
                    "triple ({user}, {item}) outside {} users x {} items",
                    users.len(),
                    items.len()
                )));
            }
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfUnitInterval {
                    value,
                    context: "rating",
                });
            }
            if !seen.insert((user, item)) {
                return Err(Error::DuplicatePair {
                    user: users[user].clone(),
                    item: items[item].clone(),
                    first_row: 0,
                    second_row: entries.len() + 1,
                });
            }
            by_user[user].push(entries.len());
            by_item[item].push(entries.len());
            entries.push(Rating { user, item, value });
        }
        if entries.is_empty() {
            return Err(Error::Empty("rating list"));
        }
        if let Some(k) = by_user.iter().position(Vec::is_empty) {
            return Err(Error::Config(format!("user {:?} has no ratings", users[k])));
        }
        if let Some(x) = by_item.iter().position(Vec::is_empty) {
            return Err(Error::Config(format!("item {:?} has no ratings", items[x])));
        }
        Ok(Self {
            users,
            items,
            entries,
            by_user,
            by_item,
        })
    }

    /// Build from identifier triples; users and items are numbered in order
    /// of first appearance.
    pub fn from_triples<I, U, X>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (U, X, f64)>,
        U: Into<String>,
        X: Into<String>,
    {
        let mut users = Vec::new();
        let mut items = Vec::new();
        let mut user_index: HashMap<String, usize> = HashMap::new();
        let mut item_index: HashMap<String, usize> = HashMap::new();
        let mut indexed = Vec::new();
        for (u, x, v) in triples {
            let u = u.into();
            let x = x.into();
            let ui = *user_index.entry(u.clone()).or_insert_with(|| {
                users.push(u);
                users.len() - 1
            });
            let xi = *item_index.entry(x.clone()).or_insert_with(|| {
                items.push(x);
                items.len() - 1
            });
            indexed.push((ui, xi, v));
        }
        Self::from_indexed(users, items, indexed)
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    /// Number of ratings.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Rating] {
        &self.entries
    }

    /// `(item, rating)` for every item `user` rated, in insertion order.
    pub fn user_ratings(&self, user: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.by_user[user].iter().map(|&e| {
            let r = self.entries[e];
            (r.item, r.value)
        })
    }

    /// `(user, rating)` for every rater of `item`, in insertion order.
    pub fn item_ratings(&self, item: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.by_item[item].iter().map(|&e| {
            let r = self.entries[e];
            (r.user, r.value)
        })
    }

    /// `N_x`: the users who rated `item`.
    pub fn raters_of(&self, item: usize) -> Vec<usize> {
        self.item_ratings(item).map(|(u, _)| u).collect()
    }

    pub fn items_of(&self, user: usize) -> Vec<usize> {
        self.user_ratings(user).map(|(x, _)| x).collect()
    }

    pub fn user_rating_count(&self, user: usize) -> usize {
        self.by_user[user].len()
    }

    pub fn item_rating_count(&self, item: usize) -> usize {
        self.by_item[item].len()
    }

    pub fn user_index(&self, id: &str) -> Option<usize> {
        self.users.iter().position(|u| u == id)
    }

    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.items.iter().position(|x| x == id)
    }

    pub fn is_dense(&self) -> bool {
        self.entries.len() == self.users.len() * self.items.len()
    }

    /// The dense matrix, when every user rated every item.
    pub fn to_complete(&self) -> Option<CompleteRatings> {
        if !self.is_dense() {
            return None;
        }
        let m = self.items.len();
        let mut values = vec![0.0; self.entries.len()];
        for r in &self.entries {
            values[r.user * m + r.item] = r.value;
        }
        CompleteRatings::new(self.users.clone(), self.items.clone(), values).ok()
    }

    /// Keep only the flagged users and items. Users or items left without
    /// any rating are dropped as well; the result may therefore be empty, in
    /// which case `None` is returned.
    pub fn restrict(&self, keep_user: &[bool], keep_item: &[bool]) -> Option<SparseRatings> {
        let kept: Vec<&Rating> = self
            .entries
            .iter()
            .filter(|r| keep_user[r.user] && keep_item[r.item])
            .collect();
        if kept.is_empty() {
            return None;
        }
        let mut user_map = vec![usize::MAX; self.users.len()];
        let mut item_map = vec![usize::MAX; self.items.len()];
        let mut users = Vec::new();
        let mut items = Vec::new();
        // Preserve the original relative order of identifiers.
        let mut user_used = vec![false; self.users.len()];
        let mut item_used = vec![false; self.items.len()];
        for r in &kept {
            user_used[r.user] = true;
            item_used[r.item] = true;
        }
        for (k, used) in user_used.iter().enumerate() {
            if *used {
                user_map[k] = users.len();
                users.push(self.users[k].clone());
            }
        }
        for (x, used) in item_used.iter().enumerate() {
            if *used {
                item_map[x] = items.len();
                items.push(self.items[x].clone());
            }
        }
        let triples = kept
            .iter()
            .map(|r| (user_map[r.user], item_map[r.item], r.value));
        Some(Self::from_indexed(users, items, triples).expect("restriction of valid data"))
    }
}

/// Each user's equal-weight distribution over the ratings they gave,
/// indexed like [`SparseRatings::users`].
pub fn user_empirical_distributions(data: &SparseRatings) -> Vec<EmpiricalDistribution> {
    (0..data.user_count())
        .map(|k| {
            let values: Vec<f64> = data.user_ratings(k).map(|(_, v)| v).collect();
            EmpiricalDistribution::from_samples(&values).expect("every user has a rating")
        })
        .collect()
}

/// Average, primitive and rating estimates on sparse data.
pub fn incomplete_aggregate(data: &SparseRatings) -> Aggregate {
    let dists = user_empirical_distributions(data);
    let barycenter = frechet_mean(&dists).expect("at least one user");

    let transported: Vec<f64> = data
        .entries()
        .par_iter()
        .map(|r| barycenter.quantile_at(dists[r.user].cdf(r.value)))
        .collect();

    let m = data.item_count();
    let mut average = Vec::with_capacity(m);
    let mut primitive = Vec::with_capacity(m);
    for x in 0..m {
        let raters = &data.by_item[x];
        let count = raters.len() as f64;
        let (mut raw, mut moved) = (0.0, 0.0);
        for &e in raters {
            raw += data.entries[e].value;
            moved += transported[e];
        }
        average.push((raw / count).clamp(0.0, 1.0));
        primitive.push((moved / count).clamp(0.0, 1.0));
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

/// Per-item mean over the item's raters.
pub fn incomplete_average_scores(data: &SparseRatings) -> ScoreTable {
    let scores = (0..data.item_count())
        .map(|x| {
            let (sum, count) = data
                .item_ratings(x)
                .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
            (sum / count as f64).clamp(0.0, 1.0)
        })
        .collect();
    table(data.items().to_vec(), scores, EstimatorTag::Average)
}

pub fn incomplete_primitive_scores(data: &SparseRatings) -> ScoreTable {
    incomplete_aggregate(data).primitive
}

pub fn incomplete_rating_scores(data: &SparseRatings) -> ScoreTable {
    incomplete_aggregate(data).rating
}
