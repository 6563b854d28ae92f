//! Central finite-difference gradient checker.
//!
//! The analytic gradients in this crate are derived by hand for two fixed
//! architectures; this checker is the oracle they are verified against.

use super::DenseMatrix;

/// Floor of the relative-error denominator.
const DENOM_FLOOR: f64 = 1e-8;

/// Outcome of a gradient check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Max over coordinates of `|a - n| / max(1e-8, |a| + |n|)`.
    pub max_rel_error: f64,
    /// `(tensor index, flat coordinate)` where the maximum occurred.
    pub worst: (usize, usize),
    pub coordinates: usize,
}

/// Analytic and numeric derivative for one parameter coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateError {
    pub tensor: usize,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

impl CoordinateError {
    pub fn relative_error(&self) -> f64 {
        (self.analytic - self.numeric).abs() / DENOM_FLOOR.max(self.analytic.abs() + self.numeric.abs())
    }
}

/// Compares the analytic gradient returned by `loss_fn` against central
/// differences `(f(θ+h) - f(θ-h)) / 2h`, one coordinate at a time.
///
/// `loss_fn` maps a full parameter set to `(loss, gradient)` where the
/// gradient has the same shapes as the parameters. It must be deterministic.
pub fn finite_diff_check<F>(loss_fn: F, params: &[DenseMatrix], h: f64) -> GradCheckReport
where
    F: FnMut(&[DenseMatrix]) -> (f64, Vec<DenseMatrix>),
{
    let errors = finite_diff_errors(loss_fn, params, h);
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: (0, 0),
        coordinates: errors.len(),
    };
    for e in &errors {
        let rel = e.relative_error();
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst = (e.tensor, e.index);
        }
    }
    report
}

/// Per-coordinate analytic and central-difference derivatives.
pub fn finite_diff_errors<F>(mut loss_fn: F, params: &[DenseMatrix], h: f64) -> Vec<CoordinateError>
where
    F: FnMut(&[DenseMatrix]) -> (f64, Vec<DenseMatrix>),
{
    let (_, analytic) = loss_fn(params);
    assert_eq!(analytic.len(), params.len(), "gradient count mismatch");
    let mut probe = params.to_vec();
    let mut out = Vec::new();
    for t in 0..params.len() {
        assert_eq!(analytic[t].shape(), params[t].shape(), "gradient {t} shape mismatch");
        for k in 0..params[t].as_slice().len() {
            let original = params[t].as_slice()[k];
            probe[t].as_mut_slice()[k] = original + h;
            let (plus, _) = loss_fn(&probe);
            probe[t].as_mut_slice()[k] = original - h;
            let (minus, _) = loss_fn(&probe);
            probe[t].as_mut_slice()[k] = original;
            out.push(CoordinateError {
                tensor: t,
                index: k,
                analytic: analytic[t].as_slice()[k],
                numeric: (plus - minus) / (2.0 * h),
            });
        }
    }
    out
}
