use crate::classifier::ClassifierConfig;
use crate::error::{Error, Result};
use crate::graph::PreparedGraph;

use super::episode::{run_episode, EpisodeConfig};
use super::selectors::FixedSequence;

/// Largest number of sequences the oracle will enumerate.
pub const MAX_ORACLE_SEQUENCES: u128 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub sequence: Vec<usize>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTable {
    /// Every ordered sequence, lexicographic in node ids.
    pub rows: Vec<OracleRow>,
    /// First row with the highest reward.
    pub best: usize,
}

impl OracleTable {
    pub fn best_row(&self) -> &OracleRow {
        &self.rows[self.best]
    }
}

/// Number of ordered selections of `budget` distinct nodes from `pool`.
pub fn sequence_count(pool: usize, budget: usize) -> u128 {
    if budget > pool {
        return 0;
    }
    (0..budget).map(|i| (pool - i) as u128).product()
}

/// Runs the full episode for every ordered query sequence with one fixed
/// classifier seed.
pub fn exhaustive_oracle(
    graph: &PreparedGraph,
    budget: usize,
    classifier_seed: u64,
    classifier: ClassifierConfig,
) -> Result<OracleTable> {
    let pool = graph.split().train.clone();
    if budget > pool.len() {
        return Err(Error::BudgetExceedsPool {
            budget,
            pool: pool.len(),
        });
    }
    let count = sequence_count(pool.len(), budget);
    if count > MAX_ORACLE_SEQUENCES {
        return Err(Error::InvalidConfig(format!(
            "oracle would enumerate {count} sequences (limit {MAX_ORACLE_SEQUENCES})"
        )));
    }
    let config = EpisodeConfig {
        budget,
        classifier,
        classifier_seed,
        evaluate_test: false,
    };
    let mut rows = Vec::with_capacity(count as usize);
    let mut prefix = Vec::with_capacity(budget);
    enumerate(&pool, budget, &mut prefix, &mut |seq| {
        let outcome = run_episode(graph, &mut FixedSequence::new(seq.to_vec()), &config)?;
        rows.push(OracleRow {
            sequence: outcome.sequence,
            reward: outcome.reward,
        });
        Ok(())
    })?;
    let mut best = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.reward > rows[best].reward {
            best = i;
        }
    }
    Ok(OracleTable { rows, best })
}

fn enumerate(
    pool: &[usize],
    budget: usize,
    prefix: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if prefix.len() == budget {
        return visit(prefix);
    }
    for &v in pool {
        if !prefix.contains(&v) {
            prefix.push(v);
            enumerate(pool, budget, prefix, visit)?;
            prefix.pop();
        }
    }
    Ok(())
}
