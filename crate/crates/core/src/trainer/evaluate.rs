use crate::baselines::{AgeWeights, Method};
use crate::classifier::ClassifierConfig;
use crate::error::{Error, Result};
use crate::graph::PreparedGraph;
use crate::metrics::mean_std;
use crate::policy::Policy;
use crate::state::FeatureMask;

use super::episode::{run_episode, EpisodeConfig, Selector};
use super::labels::LabelAudit;
use super::selectors::{HeuristicSelector, PolicySelector, SelectionMode};
use super::{derive_seed, run_seed, BudgetRule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub budget: usize,
    pub runs: usize,
    pub seed: u64,
    pub classifier: ClassifierConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    /// Classifier seed of this run.
    pub seed: u64,
    pub micro_f1: f64,
    pub macro_f1: f64,
    /// Validation micro-F1.
    pub reward: f64,
    pub sequence: Vec<usize>,
    pub audit: LabelAudit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean_micro_f1: f64,
    pub std_micro_f1: f64,
    pub mean_macro_f1: f64,
    pub std_macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub runs: Vec<RunRecord>,
}

impl Evaluation {
    pub fn summary(&self) -> Result<Summary> {
        let micro: Vec<f64> = self.runs.iter().map(|r| r.micro_f1).collect();
        let macro_: Vec<f64> = self.runs.iter().map(|r| r.macro_f1).collect();
        let (mean_micro_f1, std_micro_f1) = mean_std(&micro)?;
        let (mean_macro_f1, std_macro_f1) = mean_std(&macro_)?;
        Ok(Summary {
            mean_micro_f1,
            std_micro_f1,
            mean_macro_f1,
            std_macro_f1,
        })
    }
}

/// Independent test-scored episodes; run `r` uses classifier seed
/// `run_seed(seed, r)` and the selector built for that seed.
pub fn evaluate_with<'s, F>(graph: &PreparedGraph, config: &EvalConfig, mut make_selector: F) -> Result<Evaluation>
where
    F: FnMut(u64) -> Box<dyn Selector + 's>,
{
    if config.runs == 0 {
        return Err(Error::InvalidConfig("at least one run is required".into()));
    }
    let mut runs = Vec::with_capacity(config.runs);
    for run in 0..config.runs {
        let seed = run_seed(config.seed, run);
        let mut selector = make_selector(seed);
        let outcome = run_episode(
            graph,
            selector.as_mut(),
            &EpisodeConfig {
                budget: config.budget,
                classifier: config.classifier,
                classifier_seed: seed,
                evaluate_test: true,
            },
        )?;
        let test = outcome.test.expect("test metrics requested");
        runs.push(RunRecord {
            run,
            seed,
            micro_f1: test.micro_f1,
            macro_f1: test.macro_f1,
            reward: outcome.reward,
            sequence: outcome.sequence,
            audit: outcome.audit,
        });
    }
    Ok(Evaluation { runs })
}

/// Zero-shot evaluation: the policy picks greedily and is never updated.
pub fn evaluate_policy(
    policy: &Policy,
    alpha: f64,
    mask: FeatureMask,
    graph: &PreparedGraph,
    config: &EvalConfig,
) -> Result<Evaluation> {
    evaluate_with(graph, config, |_| {
        Box::new(PolicySelector::new(policy, alpha, mask, SelectionMode::Argmax))
    })
}

pub fn heuristic_seed(run_seed: u64) -> u64 {
    derive_seed(run_seed, &[1])
}

pub fn evaluate_heuristic(
    method: Method,
    age_weights: AgeWeights,
    graph: &PreparedGraph,
    config: &EvalConfig,
) -> Result<Evaluation> {
    evaluate_with(graph, config, |seed| {
        Box::new(HeuristicSelector::new(method, age_weights, heuristic_seed(seed)))
    })
}

/// Grid search of AGE weights on each labeled source graph by mean
/// validation reward, then the coordinate-wise mean of the winners.
/// Returns the mean and the per-graph winners.
pub fn tune_age_weights(
    graphs: &[PreparedGraph],
    budget: BudgetRule,
    runs: usize,
    seed: u64,
    classifier: ClassifierConfig,
    step: f64,
) -> Result<(AgeWeights, Vec<AgeWeights>)> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidConfig(format!("grid step {step} outside (0, 1]")));
    }
    let grid = AgeWeights::grid(step);
    let mut winners = Vec::with_capacity(graphs.len());
    for graph in graphs {
        let config = EvalConfig {
            budget: budget.resolve(graph)?,
            runs,
            seed,
            classifier,
        };
        let mut best = (f64::NEG_INFINITY, grid[0]);
        for &w in &grid {
            let eval = evaluate_heuristic(Method::Age, w, graph, &config)?;
            let reward = eval.runs.iter().map(|r| r.reward).sum::<f64>() / eval.runs.len() as f64;
            if reward > best.0 {
                best = (reward, w);
            }
        }
        log::info!("AGE weights for {}: {} (validation {:.4})", graph.name(), best.1, best.0);
        winners.push(best.1);
    }
    Ok((AgeWeights::mean(&winners)?, winners))
}
