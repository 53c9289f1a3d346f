use crate::error::{Result, RfpError};
use crate::linalg::Matrix;

/// Relative pivot threshold below which a column is declared dependent.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Orthonormal basis for the column space of `x` via Householder QR.
///
/// The sign of each basis vector is chosen so that the matching diagonal
/// entry of R is non-negative, which makes the output unique for full-rank
/// input. A Householder pivot `|R_jj|` below `RANK_THRESHOLD * ‖x‖_F` is
/// reported as a rank collapse at column `j`.
pub fn householder_orthonormalize(x: &Matrix) -> Result<Matrix> {
    let (n, k) = (x.rows(), x.cols());
    if k > n {
        return Err(RfpError::DimensionMismatch(format!(
            "cannot orthonormalize {k} columns in dimension {n}"
        )));
    }
    let threshold = RANK_THRESHOLD * x.frobenius_norm();
    let mut a = x.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut diag_sign = vec![1.0; k];

    for j in 0..k {
        let mut v: Vec<f64> = (j..n).map(|i| a.get(i, j)).collect();
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if !(norm > threshold) || norm == 0.0 {
            return Err(RfpError::RankCollapse { column: j });
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if vnorm > 0.0 {
            for t in &mut v {
                *t /= vnorm;
            }
            // A[j.., j..] -= 2 v (vᵀ A[j.., j..])
            for c in j..k {
                let proj: f64 = v.iter().enumerate().map(|(o, t)| t * a.get(j + o, c)).sum();
                for (o, t) in v.iter().enumerate() {
                    let cur = a.get(j + o, c);
                    a.set(j + o, c, cur - 2.0 * t * proj);
                }
            }
        }
        diag_sign[j] = if alpha < 0.0 { -1.0 } else { 1.0 };
        reflectors.push(v);
    }

    // Q = H_0 H_1 ... H_{k-1} [I_k; 0], applied right to left.
    let mut q = Matrix::zeros(n, k);
    for j in 0..k {
        q.set(j, j, 1.0);
    }
    for (j, v) in reflectors.iter().enumerate().rev() {
        for c in 0..k {
            let proj: f64 = v.iter().enumerate().map(|(o, t)| t * q.get(j + o, c)).sum();
            if proj == 0.0 {
                continue;
            }
            for (o, t) in v.iter().enumerate() {
                let cur = q.get(j + o, c);
                q.set(j + o, c, cur - 2.0 * t * proj);
            }
        }
    }
    for (c, &s) in diag_sign.iter().enumerate() {
        if s < 0.0 {
            for i in 0..n {
                let cur = q.get(i, c);
                q.set(i, c, -cur);
            }
        }
    }
    Ok(q)
}
