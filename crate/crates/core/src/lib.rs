//! Reinforcement-learned active learning for graph neural networks.
//!
//! A small GCN policy reads a five-column state per node (degree, prediction
//! entropy, neighbor divergences, labeled flag) and picks which node to
//! annotate next. It is trained with REINFORCE on fully labeled source
//! graphs and applied unchanged to new graphs.

pub mod baselines;
pub mod classifier;
pub mod data;
pub mod error;
pub mod gcn;
pub mod graph;
pub mod metrics;
pub mod numerics;
pub mod policy;
pub mod state;
pub mod trainer;

pub use baselines::{AgeWeights, Method};
pub use classifier::{Annotations, Classifier, ClassifierConfig, Predictions};
pub use data::{Checkpoint, CheckpointMeta, SbmConfig};
pub use error::{Error, ErrorCode, Result};
pub use graph::{Graph, NormalizedAdjacency, PreparedGraph, Split};
pub use numerics::{DenseMatrix, SparseMatrix};
pub use policy::{ActionDistribution, Architecture, Policy};
pub use state::{FeatureMask, GraphState, StateFeature};
pub use trainer::{BudgetRule, EvalConfig, TrainConfig};
