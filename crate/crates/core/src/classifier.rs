//! The two-layer GCN node classifier and its training loops.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcn::{gcn_backward, gcn_forward, GcnParams};
use crate::graph::{Graph, PreparedGraph};
use crate::metrics::micro_f1;
use crate::numerics::{cross_entropy, row_softmax, AdamConfig, AdamState, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub hidden: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub max_convergence_epochs: usize,
    pub patience: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            lr: 0.03,
            weight_decay: 5e-4,
            max_convergence_epochs: 300,
            patience: 20,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::InvalidConfig("classifier hidden size must be positive".into()));
        }
        if self.patience >= self.max_convergence_epochs {
            return Err(Error::InvalidConfig(format!(
                "patience {} must be below max_convergence_epochs {}",
                self.patience, self.max_convergence_epochs
            )));
        }
        Ok(())
    }
}

/// Nodes with revealed labels; `labels[i]` belongs to `nodes[i]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Annotations {
    pub nodes: Vec<usize>,
    pub labels: Vec<usize>,
}

impl Annotations {
    pub fn push(&mut self, node: usize, label: usize) {
        self.nodes.push(node);
        self.labels.push(label);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Classifier outputs for every node.
#[derive(Debug, Clone)]
pub struct Predictions {
    /// Last hidden layer, `n × hidden`.
    pub hidden: DenseMatrix,
    /// Class distribution per node, `n × C`.
    pub probs: DenseMatrix,
}

impl Predictions {
    pub fn predicted_classes(&self, nodes: &[usize]) -> Vec<usize> {
        let argmax = self.probs.argmax_rows();
        nodes.iter().map(|&v| argmax[v]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Classifier {
    params: GcnParams,
    adam: AdamState,
    config: ClassifierConfig,
}

impl Classifier {
    /// Glorot-initialized classifier, deterministic in `seed`.
    pub fn new(graph: &Graph, config: ClassifierConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = GcnParams::glorot(graph.feature_dim(), config.hidden, graph.num_classes(), &mut rng);
        Self::from_params(params, config)
    }

    pub fn from_params(params: GcnParams, config: ClassifierConfig) -> Self {
        let adam = AdamState::new(
            AdamConfig::new(config.lr, config.weight_decay),
            &[&params.w0, &params.w1],
        );
        Self { params, adam, config }
    }

    pub fn params(&self) -> &GcnParams {
        &self.params
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    pub fn forward(&self, graph: &PreparedGraph) -> Predictions {
        let acts = gcn_forward(&self.params, graph.adj(), graph.propagated_features(), false);
        Predictions {
            probs: row_softmax(&acts.output),
            hidden: acts.hidden,
        }
    }

    /// Mean cross-entropy over `labeled` and its gradient w.r.t. `(W0, W1)`.
    /// Weight decay is not part of this loss; Adam adds it.
    pub fn loss_and_grad(&self, graph: &PreparedGraph, labeled: &Annotations) -> Result<(f64, GcnParams)> {
        loss_and_grad(&self.params, graph, labeled)
    }

    /// One full-batch Adam step on the labeled nodes. Returns the loss
    /// measured before the step.
    pub fn train_epoch(&mut self, graph: &PreparedGraph, labeled: &Annotations) -> Result<f64> {
        let (loss, grad) = self.loss_and_grad(graph, labeled)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!(
                "classifier loss is {loss} at optimizer step {}",
                self.adam.step_count() + 1
            )));
        }
        self.adam
            .step(&mut [&mut self.params.w0, &mut self.params.w1], &[grad.w0, grad.w1]);
        if !(self.params.w0.is_finite() && self.params.w1.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite classifier weights after optimizer step {}",
                self.adam.step_count()
            )));
        }
        Ok(loss)
    }

    /// Trains until validation micro-F1 has not improved for `patience`
    /// consecutive epochs, or `max_convergence_epochs` is reached, then
    /// restores the best-scoring weights. Returns the number of epochs run.
    pub fn train_to_convergence(
        &mut self,
        graph: &PreparedGraph,
        labeled: &Annotations,
        validation: &Annotations,
    ) -> Result<usize> {
        if labeled.is_empty() {
            return Err(Error::NoLabeledNodes);
        }
        let mut best_score = f64::NEG_INFINITY;
        let mut best_params = self.params.clone();
        let mut stale = 0;
        let mut epochs = 0;
        while epochs < self.config.max_convergence_epochs {
            self.train_epoch(graph, labeled)?;
            epochs += 1;
            let score = self.score(graph, validation)?;
            if score > best_score {
                best_score = score;
                best_params.clone_from(&self.params);
                stale = 0;
            } else {
                stale += 1;
            }
            if stale >= self.config.patience {
                break;
            }
        }
        self.params = best_params;
        Ok(epochs)
    }

    /// Micro-F1 of the current weights on `nodes`.
    pub fn score(&self, graph: &PreparedGraph, nodes: &Annotations) -> Result<f64> {
        let pred = self.forward(graph).predicted_classes(&nodes.nodes);
        micro_f1(&pred, &nodes.labels)
    }
}

pub(crate) fn loss_and_grad(
    params: &GcnParams,
    graph: &PreparedGraph,
    labeled: &Annotations,
) -> Result<(f64, GcnParams)> {
    let x = graph.propagated_features();
    let acts = gcn_forward(params, graph.adj(), x, false);
    let probs = row_softmax(&acts.output);
    let (loss, d_logits) = cross_entropy(&probs, &labeled.labels, &labeled.nodes)?;
    let grad = gcn_backward(params, graph.adj(), x, &acts, &d_logits);
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_graphs::simple;
    use crate::graph::Split;
    use crate::numerics::{finite_diff_check, glorot_limit};
    use rand::Rng;

    fn random_graph(seed: u64, n: usize) -> PreparedGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let features = DenseMatrix::from_fn(n, 4, |_, _| rng.random_range(-1.0..1.0));
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(0.3) {
                    edges.push((u, v));
                }
            }
        }
        let split = Split {
            train: (0..n / 2).collect(),
            valid: (n / 2..n).collect(),
            test: vec![],
        };
        PreparedGraph::new(Graph::new("rand", 3, features, labels, edges, split).unwrap())
    }

    fn train_annotations(g: &PreparedGraph) -> Annotations {
        let mut a = Annotations::default();
        for &v in &g.split().train {
            a.push(v, g.labels()[v]);
        }
        a
    }

    fn valid_annotations(g: &PreparedGraph) -> Annotations {
        let mut a = Annotations::default();
        for &v in &g.split().valid {
            a.push(v, g.labels()[v]);
        }
        a
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let g = random_graph(0, 10);
        let a = Classifier::new(&g, ClassifierConfig::default(), 42);
        let b = Classifier::new(&g, ClassifierConfig::default(), 42);
        assert_eq!(a.params(), b.params());
        assert_eq!(a.params().w0.shape(), (4, 64));
        let limit = glorot_limit(4, 64);
        assert!(a.params().w0.as_slice().iter().all(|v| v.abs() <= limit));
    }

    #[test]
    fn zero_weights_give_uniform_predictions() {
        let g = random_graph(1, 8);
        let clf = Classifier::from_params(GcnParams::zeros(4, 64, 3), ClassifierConfig::default());
        let p = clf.forward(&g).probs;
        assert!(p.as_slice().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn isolated_node_sees_only_its_own_features() {
        let mut g = simple(3, &[(0, 1)]);
        let clf = Classifier::new(&g, ClassifierConfig { hidden: 5, ..Default::default() }, 3);
        let before = clf.forward(&PreparedGraph::new(g.clone())).probs;
        // Changing another node's features leaves node 2 untouched.
        let mut features = g.features().clone();
        features.row_mut(0).fill(9.0);
        g = Graph::new("t", 2, features, g.labels().to_vec(), g.edges().to_vec(), g.split().clone()).unwrap();
        let after = clf.forward(&PreparedGraph::new(g)).probs;
        assert_eq!(before.row(2), after.row(2));
        assert_ne!(before.row(0), after.row(0));
    }

    #[test]
    fn probability_rows_are_distributions() {
        let g = random_graph(2, 5);
        let p = Classifier::new(&g, ClassifierConfig::default(), 9).forward(&g).probs;
        for i in 0..p.rows() {
            assert!((p.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.row(i).iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        for seed in 0..5 {
            let g = random_graph(100 + seed, 10);
            let labeled = train_annotations(&g);
            let clf = Classifier::new(&g, ClassifierConfig { hidden: 6, ..Default::default() }, seed);
            let params = [clf.params().w0.clone(), clf.params().w1.clone()];
            let report = finite_diff_check(
                |p| {
                    let gp = GcnParams { w0: p[0].clone(), w1: p[1].clone() };
                    let (loss, grad) = loss_and_grad(&gp, &g, &labeled).unwrap();
                    (loss, vec![grad.w0, grad.w1])
                },
                &params,
                1e-5,
            );
            assert!(report.max_rel_error < 1e-5, "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn small_step_reduces_loss_for_most_seeds() {
        let mut improved = 0;
        for seed in 0..20 {
            let g = random_graph(200 + seed, 12);
            let labeled = train_annotations(&g);
            let config = ClassifierConfig { lr: 1e-3, ..Default::default() };
            let mut clf = Classifier::new(&g, config, seed);
            let before = clf.train_epoch(&g, &labeled).unwrap();
            let (after, _) = clf.loss_and_grad(&g, &labeled).unwrap();
            if after <= before {
                improved += 1;
            }
        }
        assert!(improved >= 18, "{improved}/20");
    }

    #[test]
    fn zero_learning_rate_keeps_weights() {
        let g = random_graph(3, 10);
        let labeled = train_annotations(&g);
        let mut clf = Classifier::new(&g, ClassifierConfig { lr: 0.0, ..Default::default() }, 1);
        let before = clf.params().clone();
        clf.train_epoch(&g, &labeled).unwrap();
        assert_eq!(clf.params(), &before);
    }

    #[test]
    fn empty_labeled_set_is_rejected() {
        let g = random_graph(4, 6);
        let mut clf = Classifier::new(&g, ClassifierConfig::default(), 1);
        assert!(matches!(clf.train_epoch(&g, &Annotations::default()), Err(Error::NoLabeledNodes)));
        assert!(clf
            .train_to_convergence(&g, &Annotations::default(), &valid_annotations(&g))
            .is_err());
    }

    #[test]
    fn zero_patience_runs_one_epoch() {
        let g = random_graph(5, 10);
        let config = ClassifierConfig { patience: 0, ..Default::default() };
        let mut clf = Classifier::new(&g, config, 1);
        let epochs = clf
            .train_to_convergence(&g, &train_annotations(&g), &valid_annotations(&g))
            .unwrap();
        assert_eq!(epochs, 1);
    }

    #[test]
    fn converged_model_stops_after_patience() {
        // With lr = 0 the validation score can never improve after epoch one.
        let g = random_graph(6, 10);
        let config = ClassifierConfig { lr: 0.0, patience: 7, ..Default::default() };
        let mut clf = Classifier::new(&g, config, 1);
        let epochs = clf
            .train_to_convergence(&g, &train_annotations(&g), &valid_annotations(&g))
            .unwrap();
        assert!(epochs <= 8, "{epochs}");
    }

    #[test]
    fn config_validation() {
        assert!(ClassifierConfig::default().validate().is_ok());
        assert!(ClassifierConfig { hidden: 0, ..Default::default() }.validate().is_err());
        assert!(ClassifierConfig { patience: 300, ..Default::default() }.validate().is_err());
    }
}
