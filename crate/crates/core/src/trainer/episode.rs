use crate::classifier::{Annotations, Classifier, ClassifierConfig, Predictions};
use crate::error::{Error, Result};
use crate::graph::PreparedGraph;
use crate::metrics::{macro_f1, micro_f1};

use super::labels::{LabelAudit, LabelStore};

/// What a selector may look at when choosing the next node.
pub struct StepContext<'a> {
    pub graph: &'a PreparedGraph,
    pub predictions: &'a Predictions,
    /// Nodes labeled so far, in query order.
    pub labeled: &'a [usize],
    /// Unlabeled train nodes, ascending.
    pub candidates: &'a [usize],
    pub step: usize,
}

/// A query strategy: picks one candidate per step.
pub trait Selector {
    fn select(&mut self, ctx: &StepContext<'_>) -> Result<usize>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeConfig {
    pub budget: usize,
    pub classifier: ClassifierConfig,
    pub classifier_seed: u64,
    /// Score the final classifier on the test split.
    pub evaluate_test: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestMetrics {
    pub micro_f1: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub sequence: Vec<usize>,
    /// Validation micro-F1 of the converged classifier.
    pub reward: f64,
    pub test: Option<TestMetrics>,
    pub audit: LabelAudit,
}

/// One budgeted query episode.
///
/// A fresh classifier is initialized from `classifier_seed`. Each step asks
/// the selector for a node, reveals its label and trains the classifier for
/// one epoch on everything labeled so far. After the last query the
/// classifier is trained to convergence with validation early stopping.
pub fn run_episode(graph: &PreparedGraph, selector: &mut dyn Selector, config: &EpisodeConfig) -> Result<EpisodeOutcome> {
    let pool = graph.split().train.len();
    if config.budget == 0 {
        return Err(Error::InvalidConfig("budget must be at least 1".into()));
    }
    if config.budget > pool {
        return Err(Error::BudgetExceedsPool {
            budget: config.budget,
            pool,
        });
    }
    config.classifier.validate()?;

    let labels = LabelStore::new(graph);
    let mut classifier = Classifier::new(graph, config.classifier, config.classifier_seed);
    let mut annotations = Annotations::default();
    for step in 0..config.budget {
        let predictions = classifier.forward(graph);
        let candidates = graph.candidate_pool(&annotations.nodes)?;
        let ctx = StepContext {
            graph,
            predictions: &predictions,
            labeled: &annotations.nodes,
            candidates: &candidates,
            step,
        };
        let v = selector.select(&ctx)?;
        if candidates.binary_search(&v).is_err() {
            return Err(Error::NotACandidate(v));
        }
        annotations.push(v, labels.reveal(v)?);
        classifier.train_epoch(graph, &annotations)?;
    }

    let validation = labels.validation();
    classifier.train_to_convergence(graph, &annotations, &validation)?;
    let reward = classifier.score(graph, &validation)?;
    let test = if config.evaluate_test {
        let test = labels.test();
        let pred = classifier.forward(graph).predicted_classes(&test.nodes);
        Some(TestMetrics {
            micro_f1: micro_f1(&pred, &test.labels)?,
            macro_f1: macro_f1(&pred, &test.labels, graph.num_classes())?,
        })
    } else {
        None
    };
    Ok(EpisodeOutcome {
        sequence: annotations.nodes,
        reward,
        test,
        audit: labels.audit(),
    })
}
