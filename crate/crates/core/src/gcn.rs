//! Two-layer graph convolution shared by the classifier and the policy.
//!
//! Layer `l` computes `Â H W`, where `Â` is the normalized adjacency. The
//! caller supplies the propagated input `Â H⁽⁰⁾` so that graphs with fixed
//! inputs (the classifier's node features) propagate them once.

use rand::Rng;

use crate::graph::NormalizedAdjacency;
use crate::numerics::{relu, relu_backward, DenseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    pub w0: DenseMatrix,
    pub w1: DenseMatrix,
}

impl GcnParams {
    pub fn glorot<R: Rng + ?Sized>(input: usize, hidden: usize, output: usize, rng: &mut R) -> Self {
        Self {
            w0: DenseMatrix::glorot_uniform(input, hidden, rng),
            w1: DenseMatrix::glorot_uniform(hidden, output, rng),
        }
    }

    pub fn zeros(input: usize, hidden: usize, output: usize) -> Self {
        Self {
            w0: DenseMatrix::zeros(input, hidden),
            w1: DenseMatrix::zeros(hidden, output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w0.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w0.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.w1.cols()
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct GcnActivations {
    /// `Â H⁽⁰⁾ W0`
    pub pre_hidden: DenseMatrix,
    /// `relu(pre_hidden)`
    pub hidden: DenseMatrix,
    /// `Â hidden W1`
    pub pre_output: DenseMatrix,
    /// `pre_output`, or `relu(pre_output)` when the output layer is rectified.
    pub output: DenseMatrix,
    relu_output: bool,
}

pub fn gcn_forward(
    params: &GcnParams,
    adj: &NormalizedAdjacency,
    propagated_input: &DenseMatrix,
    relu_output: bool,
) -> GcnActivations {
    let pre_hidden = propagated_input.matmul(&params.w0);
    let hidden = relu(&pre_hidden);
    let pre_output = adj.propagate(&hidden.matmul(&params.w1));
    let output = if relu_output {
        relu(&pre_output)
    } else {
        pre_output.clone()
    };
    GcnActivations {
        pre_hidden,
        hidden,
        pre_output,
        output,
        relu_output,
    }
}

/// Gradients `(dW0, dW1)` given the upstream gradient at `output`.
pub fn gcn_backward(
    params: &GcnParams,
    adj: &NormalizedAdjacency,
    propagated_input: &DenseMatrix,
    acts: &GcnActivations,
    d_output: &DenseMatrix,
) -> GcnParams {
    let d_pre_output = if acts.relu_output {
        relu_backward(&acts.pre_output, d_output)
    } else {
        d_output.clone()
    };
    // Â is symmetric, so Âᵀ g = Â g.
    let back = adj.propagate(&d_pre_output);
    let w1 = acts.hidden.transpose_matmul(&back);
    let d_hidden = back.matmul_transpose(&params.w1);
    let d_pre_hidden = relu_backward(&acts.pre_hidden, &d_hidden);
    let w0 = propagated_input.transpose_matmul(&d_pre_hidden);
    GcnParams { w0, w1 }
}
