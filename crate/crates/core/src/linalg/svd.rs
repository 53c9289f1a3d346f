use crate::error::{Result, RfpError};
use crate::linalg::dense::{dot, norm2};
use crate::linalg::Matrix;

const MAX_SWEEPS: usize = 60;

/// Singular values of a `rows x cols` matrix (descending), by one-sided
/// Jacobi rotations on the columns. Small singular values keep relative
/// accuracy, which the subspace-angle code depends on.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let source = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    let k = source.cols();
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| source.column(j)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut values: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values
}

/// Principal angles between the spans of two orthonormal blocks, ascending,
/// each in `[0, π/2]`.
///
/// Cosines come from the singular values of `uᵀv` and sines from those of
/// `v − u(uᵀv)`; each angle is taken from whichever is better conditioned.
pub fn principal_angles(u: &Matrix, v: &Matrix) -> Result<Vec<f64>> {
    if u.rows() != v.rows() || u.cols() != v.cols() {
        return Err(RfpError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    for block in [u, v] {
        let err = block.orthonormality_error();
        if err > 1e-8 {
            return Err(RfpError::NotOrthonormal(err));
        }
    }
    let cross = u.tr_matmul(v)?;
    let cosines = singular_values(&cross);
    let residual = v.sub(&u.matmul(&cross)?)?;
    let mut sines = singular_values(&residual);
    sines.reverse();

    Ok(cosines
        .iter()
        .zip(&sines)
        .map(|(&c, &s)| {
            let (c, s) = (c.clamp(0.0, 1.0), s.clamp(0.0, 1.0));
            if s < c {
                s.asin()
            } else {
                c.acos()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qr::householder_orthonormalize;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::FRAC_PI_2;

    fn orthonormal(seed: u64, n: usize, k: usize) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * k).map(|_| StandardNormal.sample(&mut rng)).collect();
        householder_orthonormalize(&Matrix::new(n, k, data).unwrap()).unwrap()
    }

    #[test]
    fn known_singular_values() {
        let a = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, -4.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(singular_values(&a), vec![4.0, 3.0]);
        let b = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = singular_values(&b);
        assert!((s[0] - 2.0).abs() < 1e-15 && s[1].abs() < 1e-15);
    }

    #[test]
    fn identical_and_flipped_spans() {
        let u = orthonormal(3, 10, 3);
        let angles = principal_angles(&u, &u).unwrap();
        assert!(angles.iter().all(|&a| a < 1e-7));
        let flipped = u.scale(-1.0);
        let angles = principal_angles(&u, &flipped).unwrap();
        assert!(angles.iter().all(|&a| a < 1e-7));
    }

    #[test]
    fn orthogonal_lines() {
        let u = Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let v = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let angles = principal_angles(&u, &v).unwrap();
        assert!((angles[0] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn tiny_angle_resolved() {
        let t = 1e-11f64;
        let u = Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let v = Matrix::from_rows(&[vec![t.cos()], vec![t.sin()]]).unwrap();
        let a = principal_angles(&u, &v).unwrap()[0];
        assert!((a - t).abs() < 1e-20);
    }

    #[test]
    fn non_orthonormal_rejected() {
        let u = Matrix::from_rows(&[vec![2.0], vec![0.0]]).unwrap();
        assert!(matches!(principal_angles(&u, &u), Err(RfpError::NotOrthonormal(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn symmetric_in_arguments(s1 in any::<u64>(), s2 in any::<u64>(), n in 2usize..30, k in 1usize..6) {
            let k = k.min(n);
            let u = orthonormal(s1, n, k);
            let v = orthonormal(s2, n, k);
            let a = principal_angles(&u, &v).unwrap();
            let b = principal_angles(&v, &u).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-10);
                prop_assert!(*x >= 0.0 && *x <= FRAC_PI_2);
            }
            for w in a.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-12);
            }
        }
    }
}
