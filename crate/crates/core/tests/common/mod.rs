#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use transport_ratings::EmpiricalDistribution;

/// Optimal squared-distance transport cost between two discrete measures,
/// solved as a linear program over couplings.
pub fn lp_transport_cost(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<_>> = a
        .iter()
        .map(|&(x, _)| {
            b.iter()
                .map(|&(y, _)| problem.add_var((x - y) * (x - y), (0.0, f64::INFINITY)))
                .collect()
        })
        .collect();
    for (i, &(_, w)) in a.iter().enumerate() {
        let row: Vec<_> = vars[i].iter().map(|&v| (v, 1.0)).collect();
        problem.add_constraint(&row, ComparisonOp::Eq, w);
    }
    // The last column constraint follows from the others.
    for (j, &(_, w)) in b.iter().enumerate().take(b.len() - 1) {
        let col: Vec<_> = vars.iter().map(|row| (row[j], 1.0)).collect();
        problem.add_constraint(&col, ComparisonOp::Eq, w);
    }
    problem.solve().expect("transport LP is feasible").objective()
}

/// Random atoms with positive weights summing to one, as `(x, w)` pairs.
pub fn random_atoms(rng: &mut ChaCha8Rng, max_atoms: usize) -> Vec<(f64, f64)> {
    let k = rng.gen_range(1..=max_atoms);
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut atoms: Vec<(f64, f64)> = raw.iter().map(|w| (rng.gen::<f64>(), w / total)).collect();
    let sum: f64 = atoms.iter().map(|a| a.1).sum();
    atoms[0].1 += 1.0 - sum;
    atoms
}

pub fn distribution(atoms: &[(f64, f64)]) -> EmpiricalDistribution {
    EmpiricalDistribution::from_atoms(atoms.iter().copied()).unwrap()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Position of `r` among the sorted ratings of one user, counted as the
/// number of ratings at or below `r` (1-based).
fn ind(row: &[f64], r: f64) -> usize {
    row.iter().filter(|&&x| x <= r).count()
}

/// Scale concordance from the covariance expansion over monotone couplings.
pub fn w_scale_expansion(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let m = rows[0].len() as f64;
    let s: Vec<Vec<f64>> = rows.iter().map(|r| sorted(r)).collect();
    let means: Vec<f64> = rows.iter().map(|r| mean(r)).collect();
    let var_sum: f64 = rows
        .iter()
        .zip(&means)
        .map(|(r, mu)| r.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / m)
        .sum();
    let mut num = 0.0;
    for i in 0..n {
        for k in 0..n {
            let cross: f64 = s[i].iter().zip(&s[k]).map(|(a, b)| a * b).sum();
            num += cross - m * means[i] * means[k];
        }
    }
    num / (n as f64 * m * var_sum)
}

/// Rating concordance from the fourfold covariance expansion, with
/// `Y_{i,k} = F_k^{-1}(F_i(r_{i,J}))`.
pub fn w_ratings_expansion(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let mm = rows[0].len();
    let m = mm as f64;
    let s: Vec<Vec<f64>> = rows.iter().map(|r| sorted(r)).collect();
    let means: Vec<f64> = rows.iter().map(|r| mean(r)).collect();
    let var_sum: f64 = rows
        .iter()
        .zip(&means)
        .map(|(r, mu)| r.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / m)
        .sum();
    // idx[i][j]: sorted position of user i's rating of item j.
    let idx: Vec<Vec<usize>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| ind(r, x) - 1).collect())
        .collect();
    let mut num = 0.0;
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                for p in 0..n {
                    let cross: f64 = (0..mm).map(|j| s[k][idx[i][j]] * s[p][idx[l][j]]).sum();
                    num += cross - m * means[k] * means[p];
                }
            }
        }
    }
    num / ((n * n * n) as f64 * m * var_sum)
}

/// Direct population variance of a list of values.
pub fn variance(v: &[f64]) -> f64 {
    let mu = mean(v);
    v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / v.len() as f64
}
