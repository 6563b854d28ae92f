use std::cell::RefCell;

use crate::classifier::Annotations;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Which labels an episode looked at.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelAudit {
    /// Train nodes revealed, in order.
    pub train_reads: Vec<usize>,
    pub validation_reads: usize,
    pub test_reads: usize,
}

/// Gatekeeper for ground-truth labels during an episode.
///
/// Train labels come out one node at a time through [`LabelStore::reveal`]
/// and every read is logged, so a run can be checked against its query
/// sequence afterwards.
#[derive(Debug)]
pub struct LabelStore<'g> {
    graph: &'g Graph,
    audit: RefCell<LabelAudit>,
}

impl<'g> LabelStore<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self {
            graph,
            audit: RefCell::new(LabelAudit::default()),
        }
    }

    pub fn reveal(&self, v: usize) -> Result<usize> {
        if !self.graph.is_train(v) {
            return Err(Error::NotInTrainSplit(v));
        }
        self.audit.borrow_mut().train_reads.push(v);
        Ok(self.graph.labels()[v])
    }

    pub fn validation(&self) -> Annotations {
        self.audit.borrow_mut().validation_reads += 1;
        self.annotate(&self.graph.split().valid)
    }

    pub fn test(&self) -> Annotations {
        self.audit.borrow_mut().test_reads += 1;
        self.annotate(&self.graph.split().test)
    }

    pub fn audit(&self) -> LabelAudit {
        self.audit.borrow().clone()
    }

    fn annotate(&self, nodes: &[usize]) -> Annotations {
        Annotations {
            nodes: nodes.to_vec(),
            labels: nodes.iter().map(|&v| self.graph.labels()[v]).collect(),
        }
    }
}
