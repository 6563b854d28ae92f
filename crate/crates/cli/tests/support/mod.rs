//! Double-double reference losses for the gradient oracle.
//!
//! A central difference at h = 1e-5 divides rounding noise in the loss by
//! 2h, so coordinates whose true derivative is below ~1e-6 drown in f64
//! noise. Evaluating the same forward pass in ~32-digit arithmetic removes
//! that floor without touching the step or the tolerance.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use gpal_core::numerics::LOG_EPS;
use gpal_core::{DenseMatrix, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn scale_pow2(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn exp(self) -> Self {
        let k = (self.hi / LN2.hi).round();
        // |r| <= ln2/2, shrunk by 2^10 so a short Taylor series is exact to
        // working precision; squared back up afterwards.
        let r = (self - LN2 * Dd::new(k)).scale_pow2(-10);
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for i in 1..=14 {
            term = term * r / Dd::new(i as f64);
            sum += term;
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        sum.scale_pow2(k as i32)
    }

    /// One Newton step on `exp(y) = x` from the f64 logarithm.
    pub fn ln(self) -> Self {
        let y = Dd::new(self.hi.ln());
        y + self * (-y).exp() - Dd::ONE
    }

    pub fn relu(self) -> Self {
        if self.to_f64() > 0.0 {
            self
        } else {
            Dd::ZERO
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let head = quick_two_sum(s, e + t);
        quick_two_sum(head.hi, head.lo + f)
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, o: Dd) {
        *self = *self + o;
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + -o
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        quick_two_sum(q1, q2) + Dd::new(q3)
    }
}

type Rows = Vec<Vec<Dd>>;

fn lift(m: &DenseMatrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).iter().map(|&x| Dd::new(x)).collect()).collect()
}

fn propagate(adj: &SparseMatrix, x: &Rows) -> Rows {
    let cols = x[0].len();
    (0..adj.rows())
        .map(|i| {
            let mut row = vec![Dd::ZERO; cols];
            for k in adj.row_offsets()[i]..adj.row_offsets()[i + 1] {
                let a = Dd::new(adj.values()[k]);
                for (r, &v) in row.iter_mut().zip(&x[adj.col_indices()[k]]) {
                    *r += a * v;
                }
            }
            row
        })
        .collect()
}

fn matmul(x: &Rows, w: &DenseMatrix) -> Rows {
    x.iter()
        .map(|row| {
            (0..w.cols())
                .map(|j| row.iter().enumerate().fold(Dd::ZERO, |acc, (k, &v)| acc + v * Dd::new(w[(k, j)])))
                .collect()
        })
        .collect()
}

/// Rectifies `pre` and returns the smallest `|pre|` seen, so callers can
/// tell whether a finite-difference step could cross a kink.
fn relu_rows(pre: Rows, nearest_kink: &mut f64) -> Rows {
    pre.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| {
                    *nearest_kink = nearest_kink.min(v.to_f64().abs());
                    v.relu()
                })
                .collect()
        })
        .collect()
}

fn log_sum_exp(values: impl Iterator<Item = Dd> + Clone) -> Dd {
    let max = values.clone().map(|v| v.to_f64()).fold(f64::NEG_INFINITY, f64::max);
    let m = Dd::new(max);
    let total = values.fold(Dd::ZERO, |acc, v| acc + (v - m).exp());
    m + total.ln()
}

/// Mean cross-entropy `-ln(p_y + eps)` of the two-layer node classifier,
/// and the distance of the nearest hidden pre-activation from zero.
pub fn classifier_loss(
    adj: &SparseMatrix,
    features: &DenseMatrix,
    w0: &DenseMatrix,
    w1: &DenseMatrix,
    nodes: &[usize],
    labels: &[usize],
) -> (Dd, f64) {
    let mut nearest_kink = f64::INFINITY;
    let x = propagate(adj, &lift(features));
    let hidden = relu_rows(matmul(&x, w0), &mut nearest_kink);
    let logits = propagate(adj, &matmul(&hidden, w1));
    let mut loss = Dd::ZERO;
    for (&v, &y) in nodes.iter().zip(labels) {
        let z = &logits[v];
        let p = (z[y] - log_sum_exp(z.iter().copied())).exp();
        loss = loss - (p + Dd::new(LOG_EPS)).ln();
    }
    (loss / Dd::new(nodes.len() as f64), nearest_kink)
}

/// `ln p(chosen)` under the GCN selection policy (output bias excluded),
/// and the distance of the nearest pre-activation from zero.
pub fn policy_log_prob(
    adj: &SparseMatrix,
    state: &DenseMatrix,
    tensors: &[DenseMatrix],
    candidates: &[usize],
    chosen: usize,
) -> (Dd, f64) {
    let mut nearest_kink = f64::INFINITY;
    let s = propagate(adj, &lift(state));
    let h1 = relu_rows(matmul(&s, &tensors[0]), &mut nearest_kink);
    let h2 = relu_rows(propagate(adj, &matmul(&h1, &tensors[1])), &mut nearest_kink);
    let scores: Vec<Dd> = matmul(&h2, &tensors[2]).into_iter().map(|r| r[0]).collect();
    let lse = log_sum_exp(candidates.iter().map(|&v| scores[v]));
    (scores[chosen] - lse, nearest_kink)
}

/// Max over coordinates of `|a - n| / max(1e-8, |a| + |n|)`, with `n` the
/// central difference of `loss` at step `h`.
pub fn max_relative_error(
    params: &[DenseMatrix],
    analytic: &[DenseMatrix],
    h: f64,
    mut loss: impl FnMut(&[DenseMatrix]) -> Dd,
) -> f64 {
    let mut probe = params.to_vec();
    let mut worst: f64 = 0.0;
    for t in 0..params.len() {
        for k in 0..params[t].as_slice().len() {
            let original = params[t].as_slice()[k];
            probe[t].as_mut_slice()[k] = original + h;
            let plus = loss(&probe);
            probe[t].as_mut_slice()[k] = original - h;
            let minus = loss(&probe);
            probe[t].as_mut_slice()[k] = original;
            let numeric = ((plus - minus) / Dd::new(2.0 * h)).to_f64();
            let a = analytic[t].as_slice()[k];
            worst = worst.max((a - numeric).abs() / 1e-8f64.max(a.abs() + numeric.abs()));
        }
    }
    worst
}

