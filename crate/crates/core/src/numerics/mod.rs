//! Dense and sparse linear algebra, activations, losses, Adam, and the
//! finite-difference gradient checker.

mod adam;
mod dense;
mod gradcheck;
mod ops;
mod sparse;

pub use adam::{AdamConfig, AdamState};
pub use dense::{glorot_limit, DenseMatrix};
pub use gradcheck::{finite_diff_check, finite_diff_errors, CoordinateError, GradCheckReport};
pub use ops::{cross_entropy, entropy, kl_divergence, relu, relu_backward, row_softmax, LOG_EPS};
pub use sparse::{spmm, SparseMatrix};
