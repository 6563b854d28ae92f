use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::ClassifierConfig;
use crate::error::{Error, Result};
use crate::graph::{NormalizedAdjacency, PreparedGraph};
use crate::numerics::{AdamConfig, AdamState, DenseMatrix};
use crate::policy::{Architecture, Policy};
use crate::state::{FeatureMask, DEFAULT_ALPHA};

use super::episode::{run_episode, EpisodeConfig};
use super::selectors::{PolicySelector, SelectionMode, TrajectoryStep};
use super::{derive_seed, BudgetRule};

const STREAM_INIT: u64 = 0;
const STREAM_SAMPLING: u64 = 1;
const STREAM_CLASSIFIER: u64 = 2;

/// A sampled episode as seen by the policy gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Index of the source graph.
    pub graph: usize,
    pub budget: usize,
    pub steps: Vec<TrajectoryStep>,
    pub reward: f64,
}

/// `Σ_t advantage · ln p(chosen_t)` and its gradient.
pub fn surrogate_gradient(
    policy: &Policy,
    adj: &NormalizedAdjacency,
    steps: &[TrajectoryStep],
    advantage: f64,
) -> Result<(f64, Vec<DenseMatrix>)> {
    let mut value = 0.0;
    let mut grad: Vec<DenseMatrix> = zeros_like(policy);
    for step in steps {
        let (logp, g) = policy.logprob_grad(adj, &step.state, &step.candidates, step.chosen)?;
        value += advantage * logp;
        for (acc, gi) in grad.iter_mut().zip(&g) {
            acc.add_scaled(advantage, gi);
        }
    }
    Ok((value, grad))
}

/// REINFORCE estimate `Σ_traj (R - b) Σ_t ∇ ln p(chosen_t)` for one batch
/// sharing the baseline `b`.
pub fn reinforce_gradient(
    policy: &Policy,
    adj: &NormalizedAdjacency,
    batch: &[Trajectory],
    baseline: f64,
) -> Result<Vec<DenseMatrix>> {
    let mut grad = zeros_like(policy);
    for t in batch {
        let (_, g) = surrogate_gradient(policy, adj, &t.steps, t.reward - baseline)?;
        for (acc, gi) in grad.iter_mut().zip(&g) {
            acc.add_scaled(1.0, gi);
        }
    }
    Ok(grad)
}

fn zeros_like(policy: &Policy) -> Vec<DenseMatrix> {
    policy
        .tensors()
        .iter()
        .map(|t| DenseMatrix::zeros(t.rows(), t.cols()))
        .collect()
}

/// Per-graph exponential moving average of rewards.
///
/// Starts unset; the first batch seen for a graph sets it to that batch's
/// mean reward.
#[derive(Debug, Clone, PartialEq)]
pub struct EmaBaseline {
    decay: f64,
    values: Vec<Option<f64>>,
}

impl EmaBaseline {
    pub fn new(num_graphs: usize, decay: f64) -> Self {
        Self {
            decay,
            values: vec![None; num_graphs],
        }
    }

    pub fn get(&self, graph: usize) -> Option<f64> {
        self.values[graph]
    }

    pub fn set(&mut self, graph: usize, value: f64) {
        self.values[graph] = Some(value);
    }

    pub fn observe(&mut self, graph: usize, rewards: &[f64]) {
        match &mut self.values[graph] {
            Some(b) => {
                for &r in rewards {
                    *b = self.decay * *b + (1.0 - self.decay) * r;
                }
            }
            slot @ None if !rewards.is_empty() => {
                *slot = Some(rewards.iter().sum::<f64>() / rewards.len() as f64);
            }
            None => {}
        }
    }
}

/// Adam on the policy plus the reward baselines.
#[derive(Debug, Clone)]
pub struct Reinforce {
    adam: AdamState,
    pub baselines: EmaBaseline,
}

impl Reinforce {
    pub fn new(policy: &Policy, lr: f64, num_graphs: usize, decay: f64) -> Self {
        Self {
            adam: AdamState::new(AdamConfig::new(lr, 0.0), &policy.tensors()),
            baselines: EmaBaseline::new(num_graphs, decay),
        }
    }

    /// One ascent step on the batch's REINFORCE estimate; updates the
    /// graph's baseline afterwards. All trajectories must come from `graph`.
    /// Returns the mean advantage.
    pub fn update(&mut self, policy: &mut Policy, adj: &NormalizedAdjacency, graph: usize, batch: &[Trajectory]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("empty trajectory batch"));
        }
        let rewards: Vec<f64> = batch.iter().map(|t| t.reward).collect();
        let mean_reward = rewards.iter().sum::<f64>() / rewards.len() as f64;
        let baseline = self.baselines.get(graph).unwrap_or(mean_reward);
        let grad = reinforce_gradient(policy, adj, batch, baseline)?;
        if let Some(bad) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite policy gradient in tensor {bad}; rewards {rewards:?}, baseline {baseline}"
            )));
        }
        let mut descent = grad;
        for g in &mut descent {
            g.scale(-1.0);
        }
        self.adam.step(&mut policy.tensors_mut(), &descent);
        if !policy.is_finite() {
            return Err(Error::Numeric(format!(
                "policy weights non-finite after optimizer step {}",
                self.adam.step_count()
            )));
        }
        self.baselines.observe(graph, &rewards);
        Ok(mean_reward - baseline)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub episodes: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub baseline_decay: f64,
    pub budget: BudgetRule,
    pub alpha: f64,
    pub feature_mask: FeatureMask,
    pub architecture: Architecture,
    pub classifier: ClassifierConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 2000,
            batch_size: 5,
            lr: 0.01,
            baseline_decay: 0.9,
            budget: BudgetRule::default(),
            alpha: DEFAULT_ALPHA,
            feature_mask: FeatureMask::ALL_ON,
            architecture: Architecture::Gcn,
            classifier: ClassifierConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidConfig(format!("invalid policy learning rate {}", self.lr)));
        }
        if !(0.0..=1.0).contains(&self.baseline_decay) {
            return Err(Error::InvalidConfig(format!("baseline decay {} outside [0, 1]", self.baseline_decay)));
        }
        self.classifier.validate()
    }
}

/// Mean batch reward for one graph in one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub episode: usize,
    pub graph: usize,
    pub mean_reward: f64,
    /// Baseline after the update.
    pub baseline: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: Policy,
    pub curve: Vec<CurvePoint>,
}

/// The policy a training run with this seed starts from.
pub fn initial_policy(architecture: Architecture, seed: u64) -> Policy {
    Policy::new(architecture, &mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[STREAM_INIT])))
}

/// REINFORCE over the source graphs: every episode visits each graph in
/// order, samples `batch_size` trajectories on it and applies one update.
pub fn train_policy(graphs: &[PreparedGraph], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if graphs.is_empty() {
        return Err(Error::EmptyInput("no source graphs"));
    }
    let budgets = graphs
        .iter()
        .map(|g| config.budget.resolve(g))
        .collect::<Result<Vec<_>>>()?;

    let mut policy = initial_policy(config.architecture, config.seed);
    let mut sampling = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[STREAM_SAMPLING]));
    let mut optimizer = Reinforce::new(&policy, config.lr, graphs.len(), config.baseline_decay);
    let mut curve = Vec::with_capacity(config.episodes * graphs.len());

    for episode in 0..config.episodes {
        for (gi, graph) in graphs.iter().enumerate() {
            let mut batch = Vec::with_capacity(config.batch_size);
            for item in 0..config.batch_size {
                let episode_config = EpisodeConfig {
                    budget: budgets[gi],
                    classifier: config.classifier,
                    classifier_seed: derive_seed(
                        config.seed,
                        &[STREAM_CLASSIFIER, episode as u64, gi as u64, item as u64],
                    ),
                    evaluate_test: false,
                };
                let mut selector = PolicySelector::new(
                    &policy,
                    config.alpha,
                    config.feature_mask,
                    SelectionMode::Sample(&mut sampling),
                );
                let outcome = run_episode(graph, &mut selector, &episode_config).map_err(|e| {
                    annotate_numeric(e, format!("episode {episode}, graph {}, trajectory {item}", graph.name()))
                })?;
                batch.push(Trajectory {
                    graph: gi,
                    budget: budgets[gi],
                    steps: selector.into_steps(),
                    reward: outcome.reward,
                });
            }
            let advantage = optimizer
                .update(&mut policy, graph.adj(), gi, &batch)
                .map_err(|e| annotate_numeric(e, format!("episode {episode}, graph {}", graph.name())))?;
            let mean_reward = batch.iter().map(|t| t.reward).sum::<f64>() / batch.len() as f64;
            let baseline = optimizer.baselines.get(gi).unwrap_or(mean_reward);
            debug!(
                "episode {episode} graph {} reward {mean_reward:.4} advantage {advantage:+.4} baseline {baseline:.4}",
                graph.name()
            );
            curve.push(CurvePoint {
                episode,
                graph: gi,
                mean_reward,
                baseline,
            });
        }
        if (episode + 1) % 50 == 0 {
            let recent = &curve[curve.len() - graphs.len()..];
            let mean = recent.iter().map(|c| c.mean_reward).sum::<f64>() / recent.len() as f64;
            info!("episode {}/{}: mean reward {mean:.4}", episode + 1, config.episodes);
        }
    }
    Ok(TrainOutcome { policy, curve })
}

fn annotate_numeric(err: Error, location: String) -> Error {
    match err {
        Error::Numeric(msg) => Error::Numeric(format!("{location}: {msg}")),
        other => other,
    }
}
