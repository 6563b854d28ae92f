use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{
    select_age, select_centrality, select_coreset, select_random, select_uncertainty, AgeWeights, Method,
};
use crate::error::{Error, Result};
use crate::policy::{select_argmax, select_sample, Policy};
use crate::state::{build_state, FeatureMask, GraphState};

use super::episode::{Selector, StepContext};

/// One recorded policy decision.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub state: GraphState,
    pub candidates: Vec<usize>,
    pub chosen: usize,
}

pub enum SelectionMode<'r> {
    Sample(&'r mut ChaCha8Rng),
    Argmax,
}

/// Runs a policy on the state built from the current predictions.
pub struct PolicySelector<'a> {
    policy: &'a Policy,
    alpha: f64,
    mask: FeatureMask,
    mode: SelectionMode<'a>,
    steps: Vec<TrajectoryStep>,
}

impl<'a> PolicySelector<'a> {
    pub fn new(policy: &'a Policy, alpha: f64, mask: FeatureMask, mode: SelectionMode<'a>) -> Self {
        Self {
            policy,
            alpha,
            mask,
            mode,
            steps: Vec::new(),
        }
    }

    pub fn into_steps(self) -> Vec<TrajectoryStep> {
        self.steps
    }
}

impl Selector for PolicySelector<'_> {
    fn select(&mut self, ctx: &StepContext<'_>) -> Result<usize> {
        let state = build_state(ctx.graph, &ctx.predictions.probs, ctx.labeled, self.alpha, self.mask)?;
        let dist = self.policy.forward(ctx.graph.adj(), &state, ctx.candidates)?;
        let chosen = match &mut self.mode {
            SelectionMode::Sample(rng) => select_sample(&dist, *rng),
            SelectionMode::Argmax => select_argmax(&dist),
        };
        self.steps.push(TrajectoryStep {
            state,
            candidates: ctx.candidates.to_vec(),
            chosen,
        });
        Ok(chosen)
    }
}

/// One of the heuristic strategies, with its own seeded rng.
pub struct HeuristicSelector {
    method: Method,
    age_weights: AgeWeights,
    rng: ChaCha8Rng,
}

impl HeuristicSelector {
    pub fn new(method: Method, age_weights: AgeWeights, seed: u64) -> Self {
        Self {
            method,
            age_weights,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Selector for HeuristicSelector {
    fn select(&mut self, ctx: &StepContext<'_>) -> Result<usize> {
        let k = ctx.graph.num_classes();
        let p = ctx.predictions;
        match self.method {
            Method::Random => select_random(ctx.candidates, &mut self.rng),
            Method::Uncertainty => select_uncertainty(&p.probs, ctx.candidates),
            Method::Centrality => select_centrality(ctx.graph, ctx.candidates),
            Method::Coreset => select_coreset(&p.hidden, ctx.candidates, ctx.labeled, k, &mut self.rng),
            Method::Age => select_age(
                ctx.graph,
                &p.probs,
                &p.hidden,
                ctx.candidates,
                self.age_weights,
                k,
                &mut self.rng,
            ),
        }
    }
}

/// Replays a predetermined query sequence.
pub struct FixedSequence {
    sequence: Vec<usize>,
}

impl FixedSequence {
    pub fn new(sequence: Vec<usize>) -> Self {
        Self { sequence }
    }
}

impl Selector for FixedSequence {
    fn select(&mut self, ctx: &StepContext<'_>) -> Result<usize> {
        self.sequence
            .get(ctx.step)
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("fixed sequence has no entry for step {}", ctx.step)))
    }
}
