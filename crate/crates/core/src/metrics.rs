//! Micro- and macro-averaged F1 for single-label multiclass predictions.

use crate::error::{Error, Result};

/// Pooled F1. For single-label predictions this is the fraction correct.
pub fn micro_f1(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_inputs(pred, truth)?;
    let correct = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / pred.len() as f64)
}

/// Unweighted mean of per-class `2TP / (2TP + FP + FN)`.
///
/// A class that never occurs in `truth` or `pred` has no support and is left
/// out of the mean. A class present in `truth` but never predicted scores 0.
pub fn macro_f1(pred: &[usize], truth: &[usize], num_classes: usize) -> Result<f64> {
    check_inputs(pred, truth)?;
    let mut tp = vec![0usize; num_classes];
    let mut fp = vec![0usize; num_classes];
    let mut fneg = vec![0usize; num_classes];
    for (&p, &t) in pred.iter().zip(truth) {
        assert!(p < num_classes && t < num_classes, "class id out of range");
        if p == t {
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fneg[t] += 1;
        }
    }
    let scores: Vec<f64> = (0..num_classes)
        .filter(|&c| tp[c] + fp[c] + fneg[c] > 0)
        .map(|c| 2.0 * tp[c] as f64 / (2 * tp[c] + fp[c] + fneg[c]) as f64)
        .collect();
    if scores.is_empty() {
        return Err(Error::EmptyInput("every class has zero support"));
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no values to summarize"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// Half-width of the normal 95% interval of the mean.
pub fn ci95_halfwidth(std: f64, runs: usize) -> f64 {
    1.96 * std / (runs as f64).sqrt()
}

fn check_inputs(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.is_empty() {
        return Err(Error::EmptyInput("no predictions to score"));
    }
    assert_eq!(pred.len(), truth.len(), "prediction and truth lengths differ");
    Ok(())
}
