//! Comparing aggregate rankings: rank distance, agreement with pairwise
//! majorities, top-K utilities and a Rank Centrality baseline.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{table, EstimatorTag, ScoreTable};
use crate::incomplete::SparseRatings;

/// Rank positions, 1 for the best item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    items: Vec<String>,
    ranks: Vec<usize>,
}

impl Ranking {
    pub fn new(items: Vec<String>, ranks: Vec<usize>) -> Result<Self> {
        if items.len() != ranks.len() {
            return Err(Error::Shape(format!(
                "{} items but {} ranks",
                items.len(),
                ranks.len()
            )));
        }
        crate::estimators::check_unique(&items, "item")?;
        crate::concordance::check_permutation(&ranks)?;
        Ok(Self { items, ranks })
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn rank_of(&self, item: &str) -> Option<usize> {
        self.items
            .iter()
            .position(|i| i == item)
            .map(|idx| self.ranks[idx])
    }

    /// Item identifiers from best to worst.
    pub fn ordered(&self) -> Vec<&str> {
        let mut order = vec![""; self.len()];
        for (id, &r) in self.items.iter().zip(&self.ranks) {
            order[r - 1] = id;
        }
        order
    }

    /// Identifiers of the `k` best items.
    pub fn top_k(&self, k: usize) -> Result<Vec<&str>> {
        if k > self.len() {
            return Err(Error::TopKTooLarge {
                k,
                items: self.len(),
            });
        }
        let mut order = self.ordered();
        order.truncate(k);
        Ok(order)
    }

    fn aligned_ranks(&self, other: &Ranking) -> Result<Vec<usize>> {
        if self.items == other.items {
            return Ok(other.ranks.clone());
        }
        if self.len() != other.len() {
            return Err(Error::ItemMismatch(format!(
                "{} items vs {}",
                self.len(),
                other.len()
            )));
        }
        let index: HashMap<&str, usize> = other
            .items
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        self.items
            .iter()
            .map(|id| {
                index
                    .get(id.as_str())
                    .map(|&i| other.ranks[i])
                    .ok_or_else(|| Error::ItemMismatch(format!("item {id:?} missing")))
            })
            .collect()
    }
}

/// Rank 1 goes to the highest score; equal scores are ordered by item
/// identifier.
pub fn ranking_from_scores(scores: &ScoreTable) -> Ranking {
    let items = scores.items();
    let s = scores.scores();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then_with(|| items[a].cmp(&items[b])));
    let mut ranks = vec![0; items.len()];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    Ranking {
        items: items.to_vec(),
        ranks,
    }
}

/// `(1 / (M (M - 1))) sum_k |r_k - s_k|`.
pub fn rank_distance_d1(r: &Ranking, s: &Ranking) -> Result<f64> {
    let m = r.len();
    if m < 2 {
        return Err(Error::TooFewItems { required: 2, got: m });
    }
    let other = r.aligned_ranks(s)?;
    let total: usize = r
        .ranks
        .iter()
        .zip(&other)
        .map(|(&a, &b)| a.abs_diff(b))
        .sum();
    Ok(total as f64 / (m * (m - 1)) as f64)
}

/// Head-to-head win counts between items rated by the same user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairwiseCounts {
    items: Vec<String>,
    // Keyed by (i, j) with i < j: [wins of i over j, wins of j over i].
    pairs: BTreeMap<(usize, usize), [u64; 2]>,
}

impl PairwiseCounts {
    /// Counts from explicit `(winner, loser, count)` entries over `items`.
    pub fn from_wins<I>(items: Vec<String>, wins: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        crate::estimators::check_unique(&items, "item")?;
        let mut pairs = BTreeMap::new();
        for (w, l, c) in wins {
            if w >= items.len() || l >= items.len() || w == l {
                return Err(Error::Shape(format!("invalid pair ({w}, {l})")));
            }
            if c > 0 {
                add(&mut pairs, w, l, c);
            }
        }
        Ok(Self { items, pairs })
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    /// Number of times item `i` was rated strictly above item `j`.
    pub fn wins(&self, i: usize, j: usize) -> u64 {
        if i == j {
            return 0;
        }
        let (key, side) = if i < j { ((i, j), 0) } else { ((j, i), 1) };
        self.pairs.get(&key).map_or(0, |c| c[side])
    }

    pub fn wins_by_id(&self, winner: &str, loser: &str) -> u64 {
        let pos = |id: &str| self.items.iter().position(|i| i == id);
        match (pos(winner), pos(loser)) {
            (Some(i), Some(j)) => self.wins(i, j),
            _ => 0,
        }
    }

    /// `(i, j, wins[i, j], wins[j, i])` for every pair with `i < j` and at
    /// least one strict comparison.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, u64, u64)> + '_ {
        self.pairs.iter().map(|(&(i, j), c)| (i, j, c[0], c[1]))
    }

    pub fn total_comparisons(&self) -> u64 {
        self.pairs.values().map(|c| c[0] + c[1]).sum()
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        let pairs = self
            .pairs
            .iter()
            .map(|(&k, c)| (k, [c[0] * factor, c[1] * factor]))
            .filter(|(_, c)| c[0] + c[1] > 0)
            .collect();
        Self {
            items: self.items.clone(),
            pairs,
        }
    }
}

fn add(pairs: &mut BTreeMap<(usize, usize), [u64; 2]>, winner: usize, loser: usize, count: u64) {
    let (key, side) = if winner < loser {
        ((winner, loser), 0)
    } else {
        ((loser, winner), 1)
    };
    pairs.entry(key).or_insert([0, 0])[side] += count;
}

/// Count, for every pair of items and every user rating both, which item the
/// user rated strictly higher. Ties count for neither.
pub fn pairwise_counts(data: &SparseRatings) -> PairwiseCounts {
    let pairs = (0..data.user_count())
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc, user| {
            let rated: Vec<(usize, f64)> = data.user_ratings(user).collect();
            for (a, &(i, ri)) in rated.iter().enumerate() {
                for &(j, rj) in &rated[a + 1..] {
                    if ri > rj {
                        add(&mut acc, i, j, 1);
                    } else if rj > ri {
                        add(&mut acc, j, i, 1);
                    }
                }
            }
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, c) in b {
                let e = a.entry(k).or_insert([0, 0]);
                e[0] += c[0];
                e[1] += c[1];
            }
            a
        });
    PairwiseCounts {
        items: data.items().to_vec(),
        pairs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Agreement {
    /// Share of eligible pairs where the higher score matches the majority.
    pub fraction: f64,
    pub eligible_pairs: usize,
    pub agreeing_pairs: usize,
    /// Pairs with equal win counts, left out of the denominator.
    pub tied_majority_pairs: usize,
    /// Pairs with a majority but equal scores, left out of the denominator.
    pub tied_score_pairs: usize,
}

/// Agreement of `scores` with the pairwise majority winners in `counts`.
pub fn pairwise_agreement(scores: &ScoreTable, counts: &PairwiseCounts) -> Result<Agreement> {
    let s = scores.aligned_to(counts.items())?;
    let (mut eligible, mut agreeing, mut tied_majority, mut tied_score) = (0, 0, 0, 0);
    for (i, j, wij, wji) in counts.pairs() {
        if wij == wji {
            tied_majority += 1;
            continue;
        }
        if s[i] == s[j] {
            tied_score += 1;
            continue;
        }
        eligible += 1;
        if (wij > wji) == (s[i] > s[j]) {
            agreeing += 1;
        }
    }
    if eligible == 0 {
        return Err(Error::NoEligiblePairs(
            "no pair has both a strict majority and distinct scores",
        ));
    }
    Ok(Agreement {
        fraction: agreeing as f64 / eligible as f64,
        eligible_pairs: eligible,
        agreeing_pairs: agreeing,
        tied_majority_pairs: tied_majority,
        tied_score_pairs: tied_score,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtlScores {
    /// Stationary probabilities. On a disconnected comparison graph each
    /// component's stationary distribution is weighted by its share of items.
    pub scores: ScoreTable,
    pub connected: bool,
    pub component_count: usize,
}

const BTL_TOLERANCE: f64 = 1e-15;
const BTL_MAX_ITERATIONS: usize = 1_000_000;

/// Rank Centrality: stationary distribution of the chain that moves from `i`
/// to `j` with probability `(1/d_max) wins[j,i] / (wins[i,j] + wins[j,i])`.
pub fn btl_scores(counts: &PairwiseCounts) -> Result<BtlScores> {
    if counts.total_comparisons() == 0 {
        return Err(Error::NoEligiblePairs("no pairwise comparisons"));
    }
    let m = counts.items().len();
    let mut neighbours: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (i, j, wij, wji) in counts.pairs() {
        let total = (wij + wji) as f64;
        neighbours[i].push((j, wji as f64 / total));
        neighbours[j].push((i, wij as f64 / total));
    }
    let d_max = neighbours.iter().map(Vec::len).max().unwrap_or(0) as f64;

    let components = components(&neighbours);
    let mut pi = vec![0.0; m];
    for comp in &components {
        let stationary = stationary(comp, &neighbours, d_max);
        let share = comp.len() as f64 / m as f64;
        for (&i, p) in comp.iter().zip(stationary) {
            pi[i] = (p * share).clamp(0.0, 1.0);
        }
    }
    Ok(BtlScores {
        scores: table(counts.items().to_vec(), pi, EstimatorTag::Btl),
        connected: components.len() == 1,
        component_count: components.len(),
    })
}

fn components(neighbours: &[Vec<(usize, f64)>]) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; neighbours.len()];
    let mut out = Vec::new();
    for start in 0..neighbours.len() {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        label[start] = id;
        let mut comp = vec![start];
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &(w, _) in &neighbours[v] {
                if label[w] == usize::MAX {
                    label[w] = id;
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Power iteration on the lazy chain `(P + I) / 2` restricted to `comp`.
fn stationary(comp: &[usize], neighbours: &[Vec<(usize, f64)>], d_max: f64) -> Vec<f64> {
    let k = comp.len();
    if k == 1 {
        return vec![1.0];
    }
    let local: HashMap<usize, usize> = comp.iter().enumerate().map(|(a, &i)| (i, a)).collect();
    let moves: Vec<Vec<(usize, f64)>> = comp
        .iter()
        .map(|&i| {
            neighbours[i]
                .iter()
                .map(|&(j, p)| (local[&j], 0.5 * p / d_max))
                .collect()
        })
        .collect();
    let stay: Vec<f64> = moves
        .iter()
        .map(|m| 1.0 - m.iter().map(|&(_, p)| p).sum::<f64>())
        .collect();

    let mut pi = vec![1.0 / k as f64; k];
    let mut next = vec![0.0; k];
    for _ in 0..BTL_MAX_ITERATIONS {
        for (a, n) in next.iter_mut().enumerate() {
            *n = pi[a] * stay[a];
        }
        for (a, m) in moves.iter().enumerate() {
            for &(b, p) in m {
                next[b] += pi[a] * p;
            }
        }
        let total: f64 = next.iter().sum();
        let mut change = 0.0;
        for (p, n) in pi.iter_mut().zip(&next) {
            let v = n / total;
            change += (v - *p).abs();
            *p = v;
        }
        if change < BTL_TOLERANCE {
            break;
        }
    }
    pi
}

/// Mean utilities of the items a ranking recommends, averaged per user and
/// then over users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UtilityReport {
    pub k: usize,
    /// Mean rating of the user's rated top-K items.
    pub u1: f64,
    /// Mean quantile of those ratings among the user's ratings of the
    /// compared top-K items.
    pub u2: f64,
    /// Share of those ratings at or above the user's overall mean rating.
    pub u3: f64,
    /// Users with at least one rated top-K item.
    pub users: usize,
}

/// Utilities of the top `k` items of `ranking`. With `other`, the quantile
/// utility is taken within the union of both rankings' top-K sets, counting
/// ratings of items in both sets twice.
pub fn utility_report(
    data: &SparseRatings,
    ranking: &Ranking,
    other: Option<&Ranking>,
    k: usize,
) -> Result<UtilityReport> {
    let m = data.item_count();
    let lookup = |r: &Ranking| -> Result<Vec<u8>> {
        let mut mult = vec![0u8; m];
        for id in r.top_k(k)? {
            let idx = data
                .item_index(id)
                .ok_or_else(|| Error::ItemMismatch(format!("ranked item {id:?} has no ratings")))?;
            mult[idx] = 1;
        }
        Ok(mult)
    };
    if ranking.len() != m {
        return Err(Error::ItemMismatch(format!(
            "ranking has {} items, data has {m}",
            ranking.len()
        )));
    }
    let own = lookup(ranking)?;
    let union: Vec<u8> = match other {
        Some(o) => {
            let theirs = lookup(o)?;
            own.iter().zip(&theirs).map(|(a, b)| a + b).collect()
        }
        None => own.clone(),
    };

    let per_user: Vec<Option<[f64; 3]>> = (0..data.user_count())
        .into_par_iter()
        .map(|user| {
            let rated: Vec<(usize, f64)> = data.user_ratings(user).collect();
            let eligible: Vec<f64> = rated
                .iter()
                .filter(|&&(x, _)| own[x] > 0)
                .map(|&(_, v)| v)
                .collect();
            if eligible.is_empty() {
                return None;
            }
            let overall = rated.iter().map(|&(_, v)| v).sum::<f64>() / rated.len() as f64;
            let pool: Vec<(f64, f64)> = rated
                .iter()
                .filter(|&&(x, _)| union[x] > 0)
                .map(|&(x, v)| (v, union[x] as f64))
                .collect();
            let pool_weight: f64 = pool.iter().map(|p| p.1).sum();
            let count = eligible.len() as f64;
            let u1 = eligible.iter().sum::<f64>() / count;
            let u2 = eligible
                .iter()
                .map(|&r| {
                    pool.iter().filter(|p| p.0 <= r).map(|p| p.1).sum::<f64>() / pool_weight
                })
                .sum::<f64>()
                / count;
            let u3 = eligible.iter().filter(|&&r| r >= overall - 1e-12).count() as f64 / count;
            Some([u1, u2, u3])
        })
        .collect();

    let mut sums = [0.0; 3];
    let mut users = 0;
    for u in per_user.into_iter().flatten() {
        users += 1;
        for (s, v) in sums.iter_mut().zip(u) {
            *s += v;
        }
    }
    if users == 0 {
        return Err(Error::Empty("no user rated any top-k item"));
    }
    let n = users as f64;
    Ok(UtilityReport {
        k,
        u1: sums[0] / n,
        u2: sums[1] / n,
        u3: sums[2] / n,
        users,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scores(pairs: &[(&str, f64)]) -> ScoreTable {
        ScoreTable::new(
            pairs.iter().map(|p| p.0.to_string()).collect(),
            pairs.iter().map(|p| p.1).collect(),
            EstimatorTag::Average,
        )
        .unwrap()
    }

    fn sparse(triples: &[(&str, &str, f64)]) -> SparseRatings {
        SparseRatings::from_triples(triples.iter().map(|&(u, x, v)| (u, x, v))).unwrap()
    }

    fn ranking(ranks: &[usize]) -> Ranking {
        let items = (0..ranks.len()).map(|i| format!("i{i}")).collect();
        Ranking::new(items, ranks.to_vec()).unwrap()
    }

    #[test]
    fn ranking_examples() {
        let r = ranking_from_scores(&scores(&[("a", 0.9), ("b", 0.1)]));
        assert_eq!(r.ranks(), &[1, 2]);
        let r = ranking_from_scores(&scores(&[("c", 0.5), ("a", 0.5), ("b", 0.5)]));
        assert_eq!(r.ordered(), vec!["a", "b", "c"]);
        let r = ranking_from_scores(&scores(&[("a", 0.3), ("b", 0.7), ("c", 0.5)]));
        assert_eq!(r.ranks(), &[3, 1, 2]);
        assert_eq!(r.top_k(2).unwrap(), vec!["b", "c"]);
        assert!(r.top_k(4).is_err());
        assert!(Ranking::new(vec!["a".into(), "b".into()], vec![1, 1]).is_err());
    }

    #[test]
    fn d1_examples() {
        let r = ranking(&[1, 2, 3]);
        assert_eq!(rank_distance_d1(&r, &r).unwrap(), 0.0);
        assert!((rank_distance_d1(&r, &ranking(&[3, 2, 1])).unwrap() - 4.0 / 6.0).abs() < 1e-15);
        assert!(rank_distance_d1(&ranking(&[1]), &ranking(&[1])).is_err());
        let other = Ranking::new(vec!["x".into(), "y".into(), "z".into()], vec![1, 2, 3]).unwrap();
        assert!(matches!(rank_distance_d1(&r, &other), Err(Error::ItemMismatch(_))));
    }

    #[test]
    fn d1_aligns_by_identifier() {
        let a = Ranking::new(vec!["p".into(), "q".into()], vec![1, 2]).unwrap();
        let b = Ranking::new(vec!["q".into(), "p".into()], vec![2, 1]).unwrap();
        assert_eq!(rank_distance_d1(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn counting_examples() {
        let data = sparse(&[
            ("u1", "a", 0.9),
            ("u1", "b", 0.2),
            ("u2", "a", 0.6),
            ("u2", "b", 0.5),
            ("u3", "a", 0.4),
            ("u3", "b", 0.4),
            ("u3", "c", 0.1),
        ]);
        let c = pairwise_counts(&data);
        assert_eq!(c.wins_by_id("a", "b"), 2);
        assert_eq!(c.wins_by_id("b", "a"), 0);
        assert_eq!(c.wins_by_id("a", "c"), 1);
        assert_eq!(c.total_comparisons(), 4);

        let apart = sparse(&[("u1", "a", 0.9), ("u2", "b", 0.2)]);
        assert_eq!(pairwise_counts(&apart).total_comparisons(), 0);
    }

    fn two_items(wab: u64, wba: u64) -> PairwiseCounts {
        PairwiseCounts::from_wins(vec!["a".into(), "b".into()], [(0, 1, wab), (1, 0, wba)]).unwrap()
    }

    #[test]
    fn agreement_examples() {
        let c = two_items(3, 1);
        let agree = pairwise_agreement(&scores(&[("a", 0.8), ("b", 0.2)]), &c).unwrap();
        assert_eq!(agree.fraction, 1.0);
        let against = pairwise_agreement(&scores(&[("a", 0.1), ("b", 0.2)]), &c).unwrap();
        assert_eq!(against.fraction, 0.0);
        let tied = pairwise_agreement(&scores(&[("a", 0.2), ("b", 0.2)]), &c);
        assert!(matches!(tied, Err(Error::NoEligiblePairs(_))));
        assert!(pairwise_agreement(&scores(&[("a", 0.8), ("b", 0.2)]), &two_items(2, 2)).is_err());
    }

    #[test]
    fn agreement_with_own_ratings() {
        let data = sparse(&[("u", "a", 0.3), ("u", "b", 0.9), ("u", "c", 0.6), ("u", "d", 0.1)]);
        let own = scores(&[("a", 0.3), ("b", 0.9), ("c", 0.6), ("d", 0.1)]);
        let agree = pairwise_agreement(&own, &pairwise_counts(&data)).unwrap();
        assert_eq!((agree.fraction, agree.eligible_pairs), (1.0, 6));
    }

    #[test]
    fn btl_examples() {
        let even = btl_scores(&two_items(2, 2)).unwrap();
        assert!((even.scores.scores()[0] - 0.5).abs() < 1e-12);
        assert!(even.connected);

        let skew = btl_scores(&two_items(3, 1)).unwrap();
        assert!((skew.scores.scores()[0] - 0.75).abs() < 1e-12);
        assert!((skew.scores.scores()[1] - 0.25).abs() < 1e-12);

        assert!(btl_scores(&two_items(0, 0)).is_err());
    }

    #[test]
    fn btl_undefeated_item_ranks_first() {
        let items: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let c = PairwiseCounts::from_wins(
            items,
            [(2, 0, 2), (2, 1, 1), (2, 3, 4), (0, 1, 3), (1, 0, 1), (1, 3, 2), (3, 1, 2)],
        )
        .unwrap();
        let btl = btl_scores(&c).unwrap();
        assert_eq!(ranking_from_scores(&btl.scores).ordered()[0], "c");
    }

    #[test]
    fn btl_disconnected_graph_is_flagged() {
        let items: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let c = PairwiseCounts::from_wins(items, [(0, 1, 3), (1, 0, 1), (2, 3, 1), (3, 2, 1)]).unwrap();
        let btl = btl_scores(&c).unwrap();
        assert!(!btl.connected);
        assert_eq!(btl.component_count, 2);
        let s = btl.scores.scores();
        assert!((s[0] - 0.375).abs() < 1e-12 && (s[2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn btl_is_invariant_to_count_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = 6;
            let items: Vec<String> = (0..m).map(|i| format!("i{i}")).collect();
            let wins: Vec<(usize, usize, u64)> = (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| (i, j, rand::Rng::gen_range(&mut rng, 1..6)))
                .collect();
            let c = PairwiseCounts::from_wins(items, wins).unwrap();
            let a = btl_scores(&c).unwrap();
            let b = btl_scores(&c.scaled(7)).unwrap();
            for (x, y) in a.scores.scores().iter().zip(b.scores.scores()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn utility_examples() {
        let data = sparse(&[
            ("u1", "a", 0.8),
            ("u1", "b", 0.9),
            ("u1", "c", 0.1),
            ("u2", "c", 0.5),
        ]);
        let r = ranking_from_scores(&scores(&[("a", 0.9), ("b", 0.8), ("c", 0.1)]));
        let u = utility_report(&data, &r, None, 2).unwrap();
        assert_eq!(u.users, 1);
        assert!((u.u1 - 0.85).abs() < 1e-15);
        assert_eq!(u.u3, 1.0);
        assert!((u.u2 - 0.75).abs() < 1e-15);
        assert!(matches!(utility_report(&data, &r, None, 4), Err(Error::TopKTooLarge { .. })));

        let lonely = sparse(&[("u1", "a", 0.8), ("u2", "b", 0.3)]);
        let r = ranking_from_scores(&scores(&[("a", 0.1), ("b", 0.9)]));
        assert!(matches!(utility_report(&lonely, &r, None, 1), Ok(UtilityReport { users: 1, .. })));
    }

    #[test]
    fn quantile_utility_on_union() {
        let data = sparse(&[("u", "a", 0.9), ("u", "b", 0.4), ("u", "c", 0.2)]);
        let r = ranking_from_scores(&scores(&[("a", 0.9), ("b", 0.5), ("c", 0.1)]));
        let s = ranking_from_scores(&scores(&[("a", 0.1), ("b", 0.5), ("c", 0.9)]));
        // Top-1 of r is {a}, of s is {c}: the union holds 0.9 and 0.2.
        let u = utility_report(&data, &r, Some(&s), 1).unwrap();
        assert_eq!(u.u2, 1.0);
        let v = utility_report(&data, &s, Some(&r), 1).unwrap();
        assert_eq!(v.u2, 0.5);
        // Top-2 sets {a, b} and {c, b}: b counted twice, pool weight 4.
        let w = utility_report(&data, &r, Some(&s), 2).unwrap();
        assert!((w.u2 - 0.5 * (1.0 + 0.75)).abs() < 1e-15);
    }

    #[test]
    fn random_permutation_baseline() {
        let m = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fixed = ranking(&(1..=m).collect::<Vec<_>>());
        let mut perm: Vec<usize> = (1..=m).collect();
        let draws = 10_000;
        let mut total = 0.0;
        for _ in 0..draws {
            perm.shuffle(&mut rng);
            total += rank_distance_d1(&fixed, &ranking(&perm)).unwrap();
        }
        assert!((total / draws as f64 - 1.0 / 3.0).abs() < 0.01);
    }

    fn arb_perm(m: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((1..=m).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn d1_is_a_pseudometric(
            (a, b, c) in (2usize..15).prop_flat_map(|m| (arb_perm(m), arb_perm(m), arb_perm(m)))
        ) {
            let (a, b, c) = (ranking(&a), ranking(&b), ranking(&c));
            let ab = rank_distance_d1(&a, &b).unwrap();
            prop_assert_eq!(ab, rank_distance_d1(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
            let bc = rank_distance_d1(&b, &c).unwrap();
            let ac = rank_distance_d1(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-15);
        }

        #[test]
        fn majority_order_agrees_with_itself(values in prop::collection::vec(0.0f64..1.0, 2..8)) {
            // A single user's majorities are acyclic: they follow the ratings.
            let triples: Vec<_> = values.iter().enumerate()
                .map(|(j, &v)| ("u".to_string(), format!("i{j}"), v)).collect();
            let data = SparseRatings::from_triples(triples).unwrap();
            let counts = pairwise_counts(&data);
            let table = ScoreTable::new(data.items().to_vec(), values.clone(), EstimatorTag::Average).unwrap();
            if let Ok(a) = pairwise_agreement(&table, &counts) {
                prop_assert_eq!(a.fraction, 1.0);
            }
        }
    }
}
