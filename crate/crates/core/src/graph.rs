//! Node-attributed undirected graphs and the symmetric-normalized adjacency.

use std::collections::HashSet;

use crate::error::{Error, ErrorCode, Result};
use crate::numerics::{spmm, DenseMatrix, SparseMatrix};

/// Train/validation/test node sets. Each set is sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

/// Immutable undirected graph with node features, labels and a split.
///
/// Labeling progress is tracked outside the graph so one instance can be
/// shared by the classifier, the state builder and the policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    name: String,
    num_classes: usize,
    features: DenseMatrix,
    labels: Vec<usize>,
    edges: Vec<(usize, usize)>,
    split: Split,
    adjacency: SparseMatrix,
}

impl Graph {
    /// Validates the inputs and builds the binary adjacency.
    ///
    /// Edges are canonicalized to `u < v` and sorted. A self-loop, an edge
    /// given twice (in either orientation), an out-of-range id, a label
    /// `>= num_classes`, overlapping split sets, or a feature row count that
    /// differs from the label count are each rejected with their own code.
    pub fn new(
        name: impl Into<String>,
        num_classes: usize,
        features: DenseMatrix,
        labels: Vec<usize>,
        edges: Vec<(usize, usize)>,
        split: Split,
    ) -> Result<Self> {
        let n = labels.len();
        if features.rows() != n {
            return Err(Error::data(
                ErrorCode::FeatureLength,
                format!("{} feature rows for {n} nodes", features.rows()),
            ));
        }
        if !features.is_finite() {
            return Err(Error::data(ErrorCode::Malformed, "non-finite feature value"));
        }
        if num_classes == 0 {
            return Err(Error::data(ErrorCode::Malformed, "num_classes must be positive"));
        }
        if let Some((v, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= num_classes) {
            return Err(Error::data(
                ErrorCode::LabelRange,
                format!("label {y} of node {v} is not below num_classes = {num_classes}"),
            ));
        }

        let mut canonical = Vec::with_capacity(edges.len());
        let mut seen = HashSet::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::data(
                    ErrorCode::NodeRange,
                    format!("edge {i} ({u}, {v}) references a node outside 0..{n}"),
                ));
            }
            if u == v {
                return Err(Error::data(ErrorCode::SelfLoop, format!("edge {i} ({u}, {v}) is a self-loop")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::data(
                    ErrorCode::DuplicateEdge,
                    format!("edge {i} ({u}, {v}) duplicates an earlier edge"),
                ));
            }
            canonical.push(e);
        }
        canonical.sort_unstable();

        let split = validate_split(split, n)?;

        let mut triplets = Vec::with_capacity(2 * canonical.len());
        for &(u, v) in &canonical {
            triplets.push((u, v, 1.0));
            triplets.push((v, u, 1.0));
        }
        let adjacency = SparseMatrix::from_triplets(n, n, &triplets);

        Ok(Self {
            name: name.into(),
            num_classes,
            features,
            labels,
            edges: canonical,
            split,
            adjacency,
        })
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    /// Every node's ground-truth label.
    ///
    /// Selection code should go through [`crate::trainer::LabelStore`],
    /// which audits access; this accessor is for I/O and test oracles.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn split(&self) -> &Split {
        &self.split
    }

    /// Binary symmetric adjacency without self-loops.
    pub fn adjacency(&self) -> &SparseMatrix {
        &self.adjacency
    }

    /// Sorted neighbor ids of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        self.adjacency.row(v).0
    }

    /// Number of distinct neighbors of `v`, excluding self-loops.
    ///
    /// Panics if `v` is out of range.
    pub fn degree(&self, v: usize) -> usize {
        assert!(v < self.num_nodes(), "node {v} out of range for {} nodes", self.num_nodes());
        let offsets = self.adjacency.row_offsets();
        offsets[v + 1] - offsets[v]
    }

    pub fn is_train(&self, v: usize) -> bool {
        self.split.train.binary_search(&v).is_ok()
    }

    /// Train nodes not yet in `labeled`, sorted ascending.
    pub fn candidate_pool(&self, labeled: &[usize]) -> Result<Vec<usize>> {
        let mut taken = HashSet::with_capacity(labeled.len());
        for &v in labeled {
            if !self.is_train(v) {
                return Err(Error::NotInTrainSplit(v));
            }
            taken.insert(v);
        }
        Ok(self
            .split
            .train
            .iter()
            .copied()
            .filter(|v| !taken.contains(v))
            .collect())
    }
}

fn validate_split(split: Split, n: usize) -> Result<Split> {
    let mut owner = vec![None::<&'static str>; n];
    let mut out = Split::default();
    for (name, set, dst) in [
        ("train", split.train, &mut out.train),
        ("valid", split.valid, &mut out.valid),
        ("test", split.test, &mut out.test),
    ] {
        for &v in &set {
            if v >= n {
                return Err(Error::data(
                    ErrorCode::NodeRange,
                    format!("{name} split contains node {v} outside 0..{n}"),
                ));
            }
            if let Some(prev) = owner[v] {
                return Err(Error::data(
                    ErrorCode::SplitOverlap,
                    format!("node {v} appears in {prev} and {name} splits"),
                ));
            }
            owner[v] = Some(name);
        }
        let mut set = set;
        set.sort_unstable();
        *dst = set;
    }
    Ok(out)
}

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` with `D̃` the degree-plus-one diagonal.
///
/// Symmetric, so it is its own transpose in backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    matrix: SparseMatrix,
}

impl NormalizedAdjacency {
    pub fn new(graph: &Graph) -> Self {
        let n = graph.num_nodes();
        let inv_sqrt: Vec<f64> = (0..n)
            .map(|v| 1.0 / ((graph.degree(v) + 1) as f64).sqrt())
            .collect();
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(graph.adjacency().nnz() + n);
        let mut values = Vec::with_capacity(graph.adjacency().nnz() + n);
        row_offsets.push(0);
        for u in 0..n {
            let neighbors = graph.neighbors(u);
            let split_at = neighbors.partition_point(|&w| w < u);
            let row = neighbors[..split_at]
                .iter()
                .copied()
                .chain(std::iter::once(u))
                .chain(neighbors[split_at..].iter().copied());
            for v in row {
                col_indices.push(v);
                values.push(inv_sqrt[u] * inv_sqrt[v]);
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            matrix: SparseMatrix::from_csr(n, n, row_offsets, col_indices, values),
        }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// `Â · x`
    pub fn propagate(&self, x: &DenseMatrix) -> DenseMatrix {
        spmm(&self.matrix, x)
    }
}

pub fn normalized_adjacency(graph: &Graph) -> NormalizedAdjacency {
    NormalizedAdjacency::new(graph)
}

/// A graph bundled with the quantities every GCN pass reuses: the normalized
/// adjacency and the propagated input features `Â X`.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    graph: Graph,
    adj: NormalizedAdjacency,
    propagated_features: DenseMatrix,
}

impl PreparedGraph {
    pub fn new(graph: Graph) -> Self {
        let adj = NormalizedAdjacency::new(&graph);
        let propagated_features = adj.propagate(graph.features());
        Self {
            graph,
            adj,
            propagated_features,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn adj(&self) -> &NormalizedAdjacency {
        &self.adj
    }

    pub fn propagated_features(&self) -> &DenseMatrix {
        &self.propagated_features
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }
}

impl std::ops::Deref for PreparedGraph {
    type Target = Graph;

    fn deref(&self) -> &Graph {
        &self.graph
    }
}
