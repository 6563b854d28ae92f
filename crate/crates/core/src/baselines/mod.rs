//! Heuristic query strategies: random, uncertainty, centrality, coreset and
//! the AGE weighted combination.
//!
//! Deterministic selectors break ties toward the lowest node id.

pub mod kmeans;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numerics::{entropy, DenseMatrix};

use self::kmeans::{kmeans, nearest_centroid, squared_distance, MAX_ITERATIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Random,
    Uncertainty,
    Centrality,
    Coreset,
    Age,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Random,
        Method::Uncertainty,
        Method::Centrality,
        Method::Coreset,
        Method::Age,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Uncertainty => "uncertainty",
            Method::Centrality => "centrality",
            Method::Coreset => "coreset",
            Method::Age => "age",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method '{s}'")))
    }
}

/// Convex weights of the AGE heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeWeights {
    pub entropy: f64,
    pub centrality: f64,
    pub density: f64,
}

impl AgeWeights {
    pub fn new(entropy: f64, centrality: f64, density: f64) -> Result<Self> {
        let w = Self {
            entropy,
            centrality,
            density,
        };
        let parts = [entropy, centrality, density];
        if parts.iter().any(|&x| !x.is_finite() || x < 0.0) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "AGE weights must be nonnegative and sum to 1, got {entropy},{centrality},{density}"
            )));
        }
        Ok(w)
    }

    pub fn uniform() -> Self {
        Self {
            entropy: 1.0 / 3.0,
            centrality: 1.0 / 3.0,
            density: 1.0 / 3.0,
        }
    }

    /// All simplex points whose coordinates are multiples of `step`.
    pub fn grid(step: f64) -> Vec<AgeWeights> {
        let n = (1.0 / step).round() as usize;
        let mut out = Vec::new();
        for i in 0..=n {
            for j in 0..=n - i {
                let k = n - i - j;
                out.push(AgeWeights {
                    entropy: i as f64 / n as f64,
                    centrality: j as f64 / n as f64,
                    density: k as f64 / n as f64,
                });
            }
        }
        out
    }

    /// Coordinate-wise mean, used to transfer weights tuned on several graphs.
    pub fn mean(weights: &[AgeWeights]) -> Result<AgeWeights> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("no AGE weights to average"));
        }
        let k = weights.len() as f64;
        Ok(AgeWeights {
            entropy: weights.iter().map(|w| w.entropy).sum::<f64>() / k,
            centrality: weights.iter().map(|w| w.centrality).sum::<f64>() / k,
            density: weights.iter().map(|w| w.density).sum::<f64>() / k,
        })
    }
}

impl FromStr for AgeWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidConfig(format!("AGE weights '{s}': {e}")))?;
        match parts[..] {
            [a, b, c] => AgeWeights::new(a, b, c),
            _ => Err(Error::InvalidConfig(format!("AGE weights need three values, got '{s}'"))),
        }
    }
}

impl fmt::Display for AgeWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.entropy, self.centrality, self.density)
    }
}

fn check_pool(candidates: &[usize]) -> Result<()> {
    if candidates.is_empty() {
        Err(Error::BudgetExceedsPool { budget: 1, pool: 0 })
    } else {
        Ok(())
    }
}

/// First candidate with the maximal key.
fn argmax_by_key(candidates: &[usize], mut key: impl FnMut(usize) -> f64) -> usize {
    let mut best = candidates[0];
    let mut best_key = key(best);
    for &v in &candidates[1..] {
        let k = key(v);
        if k > best_key {
            best = v;
            best_key = k;
        }
    }
    best
}

pub fn select_random<R: Rng + ?Sized>(candidates: &[usize], rng: &mut R) -> Result<usize> {
    check_pool(candidates)?;
    Ok(candidates[rng.random_range(0..candidates.len())])
}

/// Candidate whose predicted distribution has maximal entropy.
pub fn select_uncertainty(probs: &DenseMatrix, candidates: &[usize]) -> Result<usize> {
    check_pool(candidates)?;
    Ok(argmax_by_key(candidates, |v| entropy(probs.row(v))))
}

/// Candidate with the largest degree.
pub fn select_centrality(graph: &Graph, candidates: &[usize]) -> Result<usize> {
    check_pool(candidates)?;
    Ok(argmax_by_key(candidates, |v| graph.degree(v) as f64))
}

/// Coreset selection over classifier embeddings.
///
/// Clusters the candidate embeddings with k-means, marks each cluster that
/// already holds the nearest centroid of some labeled node as represented,
/// and returns the member closest to the centroid of the largest
/// unrepresented cluster. When every cluster is represented, returns the
/// candidate closest to any centroid.
pub fn select_coreset<R: Rng + ?Sized>(
    hidden: &DenseMatrix,
    candidates: &[usize],
    labeled: &[usize],
    k: usize,
    rng: &mut R,
) -> Result<usize> {
    check_pool(candidates)?;
    if k == 0 {
        return Err(Error::InvalidConfig("coreset needs k >= 1".into()));
    }
    let points = hidden.select_rows(candidates);
    let km = kmeans(&points, k, MAX_ITERATIONS, rng);
    let clusters = km.centroids.rows();

    let mut sizes = vec![0usize; clusters];
    for &c in &km.assignment {
        sizes[c] += 1;
    }
    let mut represented = vec![false; clusters];
    for &v in labeled {
        represented[nearest_centroid(hidden.row(v), &km.centroids).0] = true;
    }
    let target = (0..clusters)
        .filter(|&c| !represented[c] && sizes[c] > 0)
        .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)));

    let pick = match target {
        Some(c) => {
            let members: Vec<usize> = (0..candidates.len()).filter(|&i| km.assignment[i] == c).collect();
            let centroid = km.centroids.row(c);
            let best = argmax_by_key(&members, |i| -squared_distance(points.row(i), centroid));
            candidates[best]
        }
        None => {
            let idx: Vec<usize> = (0..candidates.len()).collect();
            candidates[argmax_by_key(&idx, |i| -nearest_centroid(points.row(i), &km.centroids).1)]
        }
    };
    Ok(pick)
}

/// Fraction of pool values strictly below each value.
pub fn percentile_ranks(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = values.len() as f64;
    values
        .iter()
        .map(|x| sorted.partition_point(|y| y < x) as f64 / n)
        .collect()
}

/// AGE scores for each candidate (aligned with `candidates`).
///
/// Each heuristic becomes a percentile rank within the pool, higher meaning
/// more informative: prediction entropy, degree, and closeness to the
/// nearest of `k` k-means centroids of the candidate embeddings. The score
/// is the weighted sum. Heuristics with zero weight are not computed.
pub fn age_score<R: Rng + ?Sized>(
    graph: &Graph,
    probs: &DenseMatrix,
    hidden: &DenseMatrix,
    candidates: &[usize],
    weights: AgeWeights,
    k: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_pool(candidates)?;
    let mut scores = vec![0.0; candidates.len()];
    let mut accumulate = |w: f64, raw: Vec<f64>| {
        for (s, p) in scores.iter_mut().zip(percentile_ranks(&raw)) {
            *s += w * p;
        }
    };
    if weights.entropy > 0.0 {
        accumulate(weights.entropy, candidates.iter().map(|&v| entropy(probs.row(v))).collect());
    }
    if weights.centrality > 0.0 {
        accumulate(weights.centrality, candidates.iter().map(|&v| graph.degree(v) as f64).collect());
    }
    if weights.density > 0.0 {
        let points = hidden.select_rows(candidates);
        let km = kmeans(&points, k.max(1), MAX_ITERATIONS, rng);
        let closeness = (0..candidates.len())
            .map(|i| -nearest_centroid(points.row(i), &km.centroids).1.sqrt())
            .collect();
        accumulate(weights.density, closeness);
    }
    Ok(scores)
}

#[allow(clippy::too_many_arguments)]
pub fn select_age<R: Rng + ?Sized>(
    graph: &Graph,
    probs: &DenseMatrix,
    hidden: &DenseMatrix,
    candidates: &[usize],
    weights: AgeWeights,
    k: usize,
    rng: &mut R,
) -> Result<usize> {
    let scores = age_score(graph, probs, hidden, candidates, weights, k, rng)?;
    let idx: Vec<usize> = (0..candidates.len()).collect();
    Ok(candidates[argmax_by_key(&idx, |i| scores[i])])
}
