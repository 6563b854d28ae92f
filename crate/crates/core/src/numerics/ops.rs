use super::DenseMatrix;
use crate::error::{Error, Result};

/// Smoothing added inside every logarithm.
pub const LOG_EPS: f64 = 1e-12;

pub fn relu(m: &DenseMatrix) -> DenseMatrix {
    m.map(|x| x.max(0.0))
}

/// Passes `upstream` through where `input > 0`; the subgradient at 0 is 0.
pub fn relu_backward(input: &DenseMatrix, upstream: &DenseMatrix) -> DenseMatrix {
    assert_eq!(input.shape(), upstream.shape(), "relu_backward: shape mismatch");
    let values = input
        .as_slice()
        .iter()
        .zip(upstream.as_slice())
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    DenseMatrix::from_vec(input.rows(), input.cols(), values)
}

/// Numerically stable per-row softmax.
pub fn row_softmax(m: &DenseMatrix) -> DenseMatrix {
    let mut out = m.clone();
    for i in 0..out.rows() {
        softmax_in_place(out.row_mut(i));
    }
    out
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in row.iter_mut() {
        *v /= total;
    }
}

/// Mean negative log-likelihood over `subset` and its gradient with respect to
/// the pre-softmax logits.
///
/// `labels[i]` is the class of `subset[i]`. The gradient is
/// `(probs - onehot) / |subset|` on subset rows and zero elsewhere.
pub fn cross_entropy(
    probs: &DenseMatrix,
    labels: &[usize],
    subset: &[usize],
) -> Result<(f64, DenseMatrix)> {
    if subset.is_empty() {
        return Err(Error::NoLabeledNodes);
    }
    assert_eq!(labels.len(), subset.len(), "cross_entropy: labels and subset differ in length");
    let scale = 1.0 / subset.len() as f64;
    let mut loss = 0.0;
    let mut grad = DenseMatrix::zeros(probs.rows(), probs.cols());
    for (&v, &y) in subset.iter().zip(labels) {
        let p = probs.row(v);
        loss -= (p[y] + LOG_EPS).ln();
        let g = grad.row_mut(v);
        for (gc, &pc) in g.iter_mut().zip(p) {
            *gc += pc * scale;
        }
        g[y] -= scale;
    }
    Ok((loss * scale, grad))
}

/// Shannon entropy in nats with ε-smoothed logarithms.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| x * (x + LOG_EPS).ln()).sum::<f64>()
}

/// `KL(p ‖ q)` in nats with ε-smoothed logarithms.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    p.iter()
        .zip(q)
        .map(|(&a, &b)| a * ((a + LOG_EPS).ln() - (b + LOG_EPS).ln()))
        .sum()
}
