//! Query episodes, REINFORCE policy training, evaluation and the exhaustive
//! oracle.

mod episode;
mod evaluate;
mod labels;
mod oracle;
mod reinforce;
mod selectors;

use std::fmt;
use std::str::FromStr;

pub use episode::{run_episode, EpisodeConfig, EpisodeOutcome, Selector, StepContext, TestMetrics};
pub use evaluate::{
    evaluate_heuristic, evaluate_policy, evaluate_with, heuristic_seed, tune_age_weights, EvalConfig, Evaluation,
    RunRecord, Summary,
};
pub use labels::{LabelAudit, LabelStore};
pub use oracle::{exhaustive_oracle, sequence_count, OracleRow, OracleTable, MAX_ORACLE_SEQUENCES};
pub use reinforce::{
    initial_policy, reinforce_gradient, surrogate_gradient, train_policy, CurvePoint, EmaBaseline, Reinforce,
    TrainConfig, TrainOutcome, Trajectory,
};
pub use selectors::{FixedSequence, HeuristicSelector, PolicySelector, SelectionMode, TrajectoryStep};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Query budget, either per class or absolute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetRule {
    PerClass(usize),
    Fixed(usize),
}

impl Default for BudgetRule {
    fn default() -> Self {
        BudgetRule::PerClass(5)
    }
}

impl BudgetRule {
    /// Budget on `graph`; errors when it exceeds the train split.
    pub fn resolve(self, graph: &Graph) -> Result<usize> {
        let budget = match self {
            BudgetRule::PerClass(k) => k * graph.num_classes(),
            BudgetRule::Fixed(b) => b,
        };
        let pool = graph.split().train.len();
        if budget == 0 {
            return Err(Error::InvalidConfig("budget must be at least 1".into()));
        }
        if budget > pool {
            return Err(Error::BudgetExceedsPool { budget, pool });
        }
        Ok(budget)
    }
}

impl fmt::Display for BudgetRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetRule::PerClass(k) => write!(f, "{k}xC"),
            BudgetRule::Fixed(b) => write!(f, "{b}"),
        }
    }
}

/// `20` or `5xC`.
impl FromStr for BudgetRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("invalid budget '{s}'"));
        match s.trim().strip_suffix("xC") {
            Some(k) => k.parse().map(BudgetRule::PerClass).map_err(|_| bad()),
            None => s.trim().parse().map(BudgetRule::Fixed).map_err(|_| bad()),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic child seed for a named stream under `base`.
pub fn derive_seed(base: u64, stream: &[u64]) -> u64 {
    stream
        .iter()
        .fold(splitmix64(base), |h, &s| splitmix64(h ^ splitmix64(s.wrapping_add(0x632B_E59B_D9B4_E019))))
}

/// Classifier seed of evaluation run `run`.
pub fn run_seed(base: u64, run: usize) -> u64 {
    derive_seed(base, &[run as u64])
}

#[cfg(test)]
mod tests;
