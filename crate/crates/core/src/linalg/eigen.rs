//! Dense symmetric eigensolver (cyclic Jacobi) used as the reference oracle.

use crate::error::{Result, RfpError};
use crate::linalg::Matrix;
use crate::operator::ORACLE_CAP;

/// Allowed asymmetry `max |M_ij − M_ji|` of oracle input.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Eigenpairs sorted by descending `|λ|` (ties by descending `λ`), with
/// vectors as orthonormal columns whose first non-negligible component is
/// positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    /// Leading `k` pairs.
    pub fn truncate(&self, k: usize) -> EigenPairs {
        EigenPairs {
            values: self.values[..k].to_vec(),
            vectors: self.vectors.column_range(0, k),
        }
    }
}

/// Top-`k` eigenpairs of a dense symmetric matrix by magnitude.
pub fn dense_sym_eigen(matrix: &Matrix, k: usize) -> Result<EigenPairs> {
    let n = matrix.rows();
    if matrix.cols() != n {
        return Err(RfpError::DimensionMismatch("eigensolver needs a square matrix".into()));
    }
    if n > ORACLE_CAP {
        return Err(RfpError::OracleCapExceeded { n, cap: ORACLE_CAP });
    }
    if k == 0 || k > n {
        return Err(RfpError::OutOfRange(format!("k = {k} for a {n}x{n} matrix")));
    }
    let asym = matrix.max_asymmetry();
    if asym > SYMMETRY_TOLERANCE {
        return Err(RfpError::Asymmetric(asym));
    }
    Ok(full_spectrum(matrix).truncate(k))
}

/// All eigenpairs; input assumed symmetric (only the upper triangle is read).
pub(crate) fn full_spectrum(matrix: &Matrix) -> EigenPairs {
    let n = matrix.rows();
    let mut a = matrix.clone();
    for i in 0..n {
        for j in 0..i {
            a.set(i, j, a.get(j, i));
        }
    }
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).powi(2))
            .sum();
        if off == 0.0 || off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a.get(p, p), a.get(q, q));
                if apq.abs() <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()).max(f64::MIN_POSITIVE) {
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    continue;
                }
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let values: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .abs()
            .partial_cmp(&values[i].abs())
            .unwrap()
            .then(values[j].partial_cmp(&values[i]).unwrap())
    });
    // Magnitude ties within rounding are ordered by signed value.
    let tie = 1e-10 * values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    for _ in 0..n {
        let mut swapped = false;
        for w in 0..n.saturating_sub(1) {
            let (x, y) = (values[order[w]], values[order[w + 1]]);
            if (x.abs() - y.abs()).abs() <= tie && y > x {
                order.swap(w, w + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }

    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    EigenPairs {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors,
    }
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for r in 0..n {
        let (arp, arq) = (a.get(r, p), a.get(r, q));
        a.set(r, p, c * arp - s * arq);
        a.set(r, q, s * arp + c * arq);
    }
    for r in 0..n {
        let (apr, aqr) = (a.get(p, r), a.get(q, r));
        a.set(p, r, c * apr - s * aqr);
        a.set(q, r, s * apr + c * aqr);
    }
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for r in 0..n {
        let (vrp, vrq) = (v.get(r, p), v.get(r, q));
        v.set(r, p, c * vrp - s * vrq);
        v.set(r, q, s * vrp + c * vrq);
    }
}

/// Flips `col` so that its first component with magnitude above `1e-12` is
/// positive.
pub fn fix_sign(col: &mut [f64]) {
    if let Some(&lead) = col.iter().find(|x| x.abs() > 1e-12) {
        if lead < 0.0 {
            for x in col.iter_mut() {
                *x = -*x;
            }
        }
    }
}
