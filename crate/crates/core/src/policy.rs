//! Query policies: a GCN over the state matrix (and an MLP ablation) that
//! scores every node, followed by a softmax restricted to the candidates.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, ErrorCode, Result};
use crate::gcn::{gcn_backward, gcn_forward, GcnParams};
use crate::graph::NormalizedAdjacency;
use crate::numerics::{relu, relu_backward, DenseMatrix};
use crate::state::{GraphState, STATE_DIM};

pub const POLICY_HIDDEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    Gcn,
    Mlp,
}

impl Architecture {
    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Gcn => "gcn",
            Architecture::Mlp => "mlp",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gcn" => Ok(Architecture::Gcn),
            "mlp" => Ok(Architecture::Mlp),
            other => Err(Error::data(
                ErrorCode::ArchitectureMismatch,
                format!("unknown policy architecture '{other}'"),
            )),
        }
    }
}

/// GCN policy: two graph convolutions (5→8→8, ReLU after each) and a
/// linear head producing one score per node. The convolutions have no bias.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub gcn: GcnParams,
    pub head_w: DenseMatrix,
    /// 1×1; kept as a matrix so every parameter is optimized the same way.
    pub head_b: DenseMatrix,
}

/// Node-wise 5→8→8→1 MLP with biases; sees no graph structure.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpPolicyParams {
    pub w0: DenseMatrix,
    pub b0: DenseMatrix,
    pub w1: DenseMatrix,
    pub b1: DenseMatrix,
    pub w2: DenseMatrix,
    pub b2: DenseMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Gcn(PolicyParams),
    Mlp(MlpPolicyParams),
}

/// Probability of selecting each node. Non-candidates hold exactly 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    probs: Vec<f64>,
    candidates: Vec<usize>,
    /// `ln` of the softmax denominator relative to the top score.
    log_norm: f64,
    max: f64,
    scores: Vec<f64>,
}

impl ActionDistribution {
    /// Softmax of `scores` restricted to `candidates` (sorted, nonempty).
    pub fn masked_softmax(scores: &[f64], candidates: &[usize]) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::BudgetExceedsPool { budget: 1, pool: 0 });
        }
        debug_assert!(candidates.windows(2).all(|w| w[0] < w[1]));
        let max = candidates
            .iter()
            .map(|&v| scores[v])
            .fold(f64::NEG_INFINITY, f64::max);
        let mut probs = vec![0.0; scores.len()];
        let mut total = 0.0;
        for &v in candidates {
            let e = (scores[v] - max).exp();
            probs[v] = e;
            total += e;
        }
        for &v in candidates {
            probs[v] /= total;
        }
        // The top candidate contributes exactly 1 to the denominator; summing
        // the rest separately keeps ln p accurate when p is close to 1.
        let top = candidates.iter().position(|&v| scores[v] == max).unwrap_or(0);
        let rest: f64 = candidates
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != top)
            .map(|(_, &v)| (scores[v] - max).exp())
            .sum();
        Ok(Self {
            probs,
            candidates: candidates.to_vec(),
            log_norm: rest.ln_1p(),
            max,
            scores: scores.to_vec(),
        })
    }

    /// `ln p(v)` for a candidate, computed from the scores rather than `p`.
    pub fn log_prob(&self, v: usize) -> f64 {
        debug_assert!(self.is_candidate(v));
        (self.scores[v] - self.max) - self.log_norm
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, v: usize) -> f64 {
        self.probs[v]
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn is_candidate(&self, v: usize) -> bool {
        self.candidates.binary_search(&v).is_ok()
    }
}

/// Inverse-CDF categorical draw over candidates in ascending id order.
pub fn select_sample<R: Rng + ?Sized>(dist: &ActionDistribution, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &v in &dist.candidates {
        acc += dist.probs[v];
        if u < acc {
            return v;
        }
    }
    // Rounding left the cumulative sum just under u: take the last candidate
    // with nonzero mass.
    *dist
        .candidates
        .iter()
        .rev()
        .find(|&&v| dist.probs[v] > 0.0)
        .unwrap_or(&dist.candidates[dist.candidates.len() - 1])
}

/// Most probable candidate; ties go to the lowest node id.
pub fn select_argmax(dist: &ActionDistribution) -> usize {
    let mut best = dist.candidates[0];
    for &v in &dist.candidates[1..] {
        if dist.probs[v] > dist.probs[best] {
            best = v;
        }
    }
    best
}

struct GcnTrace {
    propagated_state: DenseMatrix,
    acts: crate::gcn::GcnActivations,
}

struct MlpTrace {
    pre1: DenseMatrix,
    h1: DenseMatrix,
    pre2: DenseMatrix,
    h2: DenseMatrix,
}

fn add_row_bias(m: &mut DenseMatrix, bias: &DenseMatrix) {
    for i in 0..m.rows() {
        for (x, b) in m.row_mut(i).iter_mut().zip(bias.as_slice()) {
            *x += b;
        }
    }
}

fn column_sums(m: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(1, m.cols());
    for i in 0..m.rows() {
        for (o, x) in out.as_mut_slice().iter_mut().zip(m.row(i)) {
            *o += x;
        }
    }
    out
}

impl Policy {
    pub fn new_gcn<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let gcn = GcnParams::glorot(STATE_DIM, POLICY_HIDDEN, POLICY_HIDDEN, rng);
        let head_w = DenseMatrix::glorot_uniform(POLICY_HIDDEN, 1, rng);
        Policy::Gcn(PolicyParams {
            gcn,
            head_w,
            head_b: DenseMatrix::zeros(1, 1),
        })
    }

    pub fn new_mlp<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Policy::Mlp(MlpPolicyParams {
            w0: DenseMatrix::glorot_uniform(STATE_DIM, POLICY_HIDDEN, rng),
            b0: DenseMatrix::zeros(1, POLICY_HIDDEN),
            w1: DenseMatrix::glorot_uniform(POLICY_HIDDEN, POLICY_HIDDEN, rng),
            b1: DenseMatrix::zeros(1, POLICY_HIDDEN),
            w2: DenseMatrix::glorot_uniform(POLICY_HIDDEN, 1, rng),
            b2: DenseMatrix::zeros(1, 1),
        })
    }

    pub fn new<R: Rng + ?Sized>(architecture: Architecture, rng: &mut R) -> Self {
        match architecture {
            Architecture::Gcn => Self::new_gcn(rng),
            Architecture::Mlp => Self::new_mlp(rng),
        }
    }

    /// All-zero parameters of the given architecture.
    pub fn zeros(architecture: Architecture) -> Self {
        let tensors = Self::tensor_shapes(architecture)
            .iter()
            .map(|&(r, c)| DenseMatrix::zeros(r, c))
            .collect();
        Self::from_tensors(architecture, tensors).expect("shapes come from the architecture")
    }

    pub fn architecture(&self) -> Architecture {
        match self {
            Policy::Gcn(_) => Architecture::Gcn,
            Policy::Mlp(_) => Architecture::Mlp,
        }
    }

    /// Parameter tensors in a fixed order, paired with [`Self::tensor_names`].
    pub fn tensors(&self) -> Vec<&DenseMatrix> {
        match self {
            Policy::Gcn(p) => vec![&p.gcn.w0, &p.gcn.w1, &p.head_w, &p.head_b],
            Policy::Mlp(p) => vec![&p.w0, &p.b0, &p.w1, &p.b1, &p.w2, &p.b2],
        }
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut DenseMatrix> {
        match self {
            Policy::Gcn(p) => vec![&mut p.gcn.w0, &mut p.gcn.w1, &mut p.head_w, &mut p.head_b],
            Policy::Mlp(p) => vec![&mut p.w0, &mut p.b0, &mut p.w1, &mut p.b1, &mut p.w2, &mut p.b2],
        }
    }

    pub fn tensor_names(architecture: Architecture) -> &'static [&'static str] {
        match architecture {
            Architecture::Gcn => &["w0", "w1", "head_w", "head_b"],
            Architecture::Mlp => &["w0", "b0", "w1", "b1", "w2", "b2"],
        }
    }

    /// Expected `(rows, cols)` of each tensor, in [`Self::tensors`] order.
    pub fn tensor_shapes(architecture: Architecture) -> &'static [(usize, usize)] {
        const H: usize = POLICY_HIDDEN;
        match architecture {
            Architecture::Gcn => &[(STATE_DIM, H), (H, H), (H, 1), (1, 1)],
            Architecture::Mlp => &[(STATE_DIM, H), (1, H), (H, H), (1, H), (H, 1), (1, 1)],
        }
    }

    /// Rebuilds a policy from tensors in [`Self::tensors`] order.
    pub fn from_tensors(architecture: Architecture, tensors: Vec<DenseMatrix>) -> Result<Self> {
        let shapes = Self::tensor_shapes(architecture);
        if tensors.len() != shapes.len() {
            return Err(Error::data(
                ErrorCode::ArchitectureMismatch,
                format!("{architecture} policy has {} tensors, got {}", shapes.len(), tensors.len()),
            ));
        }
        for ((t, &shape), name) in tensors.iter().zip(shapes).zip(Self::tensor_names(architecture)) {
            if t.shape() != shape {
                return Err(Error::data(
                    ErrorCode::ArchitectureMismatch,
                    format!("tensor {name} has shape {:?}, expected {shape:?}", t.shape()),
                ));
            }
        }
        let mut it = tensors.into_iter();
        let mut next = || it.next().expect("length checked above");
        Ok(match architecture {
            Architecture::Gcn => Policy::Gcn(PolicyParams {
                gcn: GcnParams { w0: next(), w1: next() },
                head_w: next(),
                head_b: next(),
            }),
            Architecture::Mlp => Policy::Mlp(MlpPolicyParams {
                w0: next(),
                b0: next(),
                w1: next(),
                b1: next(),
                w2: next(),
                b2: next(),
            }),
        })
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.as_slice().len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }

    fn gcn_trace(p: &PolicyParams, adj: &NormalizedAdjacency, state: &GraphState) -> (Vec<f64>, GcnTrace) {
        let propagated_state = adj.propagate(&state.matrix);
        let acts = gcn_forward(&p.gcn, adj, &propagated_state, true);
        let scores = acts.output.matmul(&p.head_w).into_vec();
        (scores, GcnTrace { propagated_state, acts })
    }

    fn mlp_trace(p: &MlpPolicyParams, state: &GraphState) -> (Vec<f64>, MlpTrace) {
        let mut pre1 = state.matrix.matmul(&p.w0);
        add_row_bias(&mut pre1, &p.b0);
        let h1 = relu(&pre1);
        let mut pre2 = h1.matmul(&p.w1);
        add_row_bias(&mut pre2, &p.b1);
        let h2 = relu(&pre2);
        let scores = h2.matmul(&p.w2).into_vec();
        (scores, MlpTrace { pre1, h1, pre2, h2 })
    }

    /// Per-node scores `W H + b`.
    pub fn scores(&self, adj: &NormalizedAdjacency, state: &GraphState) -> Vec<f64> {
        let (mut scores, b) = match self {
            Policy::Gcn(p) => (Self::gcn_trace(p, adj, state).0, p.head_b[(0, 0)]),
            Policy::Mlp(p) => (Self::mlp_trace(p, state).0, p.b2[(0, 0)]),
        };
        for s in &mut scores {
            *s += b;
        }
        scores
    }

    /// Selection distribution over `candidates`. The MLP ignores `adj`.
    ///
    /// The output bias shifts every score equally, so it cancels in the
    /// softmax and is left out of the normalization altogether; its
    /// gradient is exactly zero.
    pub fn forward(
        &self,
        adj: &NormalizedAdjacency,
        state: &GraphState,
        candidates: &[usize],
    ) -> Result<ActionDistribution> {
        let scores = match self {
            Policy::Gcn(p) => Self::gcn_trace(p, adj, state).0,
            Policy::Mlp(p) => Self::mlp_trace(p, state).0,
        };
        ActionDistribution::masked_softmax(&scores, candidates)
    }

    /// Gradient of `ln p(chosen)` with respect to every tensor, in
    /// [`Self::tensors`] order.
    pub fn logprob_grad(
        &self,
        adj: &NormalizedAdjacency,
        state: &GraphState,
        candidates: &[usize],
        chosen: usize,
    ) -> Result<(f64, Vec<DenseMatrix>)> {
        if candidates.binary_search(&chosen).is_err() {
            return Err(Error::NotACandidate(chosen));
        }
        let n = state.matrix.rows();
        let backprop_scores = |scores: &[f64]| -> Result<(f64, DenseMatrix)> {
            let dist = ActionDistribution::masked_softmax(scores, candidates)?;
            let mut d_scores = DenseMatrix::zeros(n, 1);
            for &v in candidates {
                d_scores[(v, 0)] = -dist.prob(v);
            }
            d_scores[(chosen, 0)] += 1.0;
            Ok((dist.log_prob(chosen), d_scores))
        };
        match self {
            Policy::Gcn(p) => {
                let (scores, trace) = Self::gcn_trace(p, adj, state);
                let (logp, d_scores) = backprop_scores(&scores)?;
                let d_head_w = trace.acts.output.transpose_matmul(&d_scores);
                let d_head_b = DenseMatrix::from_vec(1, 1, vec![d_scores.sum()]);
                let d_output = d_scores.matmul_transpose(&p.head_w);
                let g = gcn_backward(&p.gcn, adj, &trace.propagated_state, &trace.acts, &d_output);
                Ok((logp, vec![g.w0, g.w1, d_head_w, d_head_b]))
            }
            Policy::Mlp(p) => {
                let (scores, t) = Self::mlp_trace(p, state);
                let (logp, d_scores) = backprop_scores(&scores)?;
                let d_w2 = t.h2.transpose_matmul(&d_scores);
                let d_b2 = DenseMatrix::from_vec(1, 1, vec![d_scores.sum()]);
                let d_pre2 = relu_backward(&t.pre2, &d_scores.matmul_transpose(&p.w2));
                let d_w1 = t.h1.transpose_matmul(&d_pre2);
                let d_b1 = column_sums(&d_pre2);
                let d_pre1 = relu_backward(&t.pre1, &d_pre2.matmul_transpose(&p.w1));
                let d_w0 = state.matrix.transpose_matmul(&d_pre1);
                let d_b0 = column_sums(&d_pre1);
                Ok((logp, vec![d_w0, d_b0, d_w1, d_b1, d_w2, d_b2]))
            }
        }
    }
}
