//! Dense block kernels, sparse propagation and the reference eigensolver.

pub mod dense;
pub mod eigen;
pub mod qr;
pub mod svd;

pub use dense::{FeatureBlock, Matrix};
pub use eigen::{dense_sym_eigen, EigenPairs};
pub use svd::{principal_angles, singular_values};

use crate::error::{Result, RfpError};
use crate::operator::PropagationOperator;

/// Columns with norm at or below this are treated as zero.
pub const ZERO_COLUMN_THRESHOLD: f64 = 1e-300;

/// `S · x`.
pub fn spmm(op: &PropagationOperator, x: &FeatureBlock) -> Result<FeatureBlock> {
    op.apply(x)
}

/// Scales every column to unit ℓ2 norm.
pub fn normalize_l2(x: &FeatureBlock) -> Result<FeatureBlock> {
    let (n, k) = (x.rows(), x.cols());
    let mut norms = vec![0.0f64; k];
    for i in 0..n {
        for (acc, v) in norms.iter_mut().zip(x.row(i)) {
            *acc += v * v;
        }
    }
    for (column, norm) in norms.iter_mut().enumerate() {
        *norm = norm.sqrt();
        if !(*norm > ZERO_COLUMN_THRESHOLD) {
            return Err(RfpError::DegenerateColumn { column });
        }
    }
    let mut out = x.clone();
    for row in out.data_mut().chunks_mut(k) {
        for (v, norm) in row.iter_mut().zip(&norms) {
            *v /= norm;
        }
    }
    Ok(out)
}

/// Orthonormal basis of `span(x)` with a non-negative R diagonal.
pub fn normalize_qr(x: &FeatureBlock) -> Result<FeatureBlock> {
    qr::householder_orthonormalize(x)
}

/// Dense copy of a sparse operator (bounded by the oracle cap).
pub fn dense_mirror(op: &PropagationOperator) -> Result<Matrix> {
    op.dense_mirror()
}
