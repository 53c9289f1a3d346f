//! Convergence of trajectories toward the dominant eigenvectors of their
//! operator, measured against the dense Jacobi oracle.

use crate::engine::{Normalization, Trajectory};
use crate::error::{Result, RfpError};
use crate::linalg::dense::dot;
use crate::linalg::eigen::full_spectrum;
use crate::linalg::{principal_angles, spmm, EigenPairs, FeatureBlock};
use crate::operator::{PropagationOperator, ORACLE_CAP};

/// Adjacent `|λ|` ratios above `1 − DEGENERACY_GAP` count as ties.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Default angle tolerance (radians) for declaring convergence.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    /// Largest principal angle to the oracle top-k eigenspace.
    pub max_principal_angle: Option<f64>,
    /// `‖S a − a Λ̂‖_F` with `Λ̂ = diag(aᵀ S a)`.
    pub eigen_residual: f64,
    /// `|cos|` between each column and its index-matched oracle vector.
    pub per_column_cosines: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub k: usize,
    pub tolerance: f64,
    pub per_step: Vec<StepDiagnostics>,
    /// Leading `min(k + 1, n)` oracle eigenvalues.
    pub oracle_values: Option<Vec<f64>>,
    /// `|λ_{k+1}| / |λ_k|` (zero when `k = n`).
    pub oracle_gap: Option<f64>,
    pub degenerate: bool,
    pub converged_at: Option<usize>,
}

impl ConvergenceReport {
    /// Converged and the oracle spectrum separates the top `k + 1` values.
    pub fn certified(&self) -> bool {
        self.converged_at.is_some() && !self.degenerate
    }

    pub fn final_angle(&self) -> Option<f64> {
        self.per_step.last().and_then(|s| s.max_principal_angle)
    }
}

/// Compares every normalized step of `t` with the oracle eigenvectors of `op`.
///
/// Above the oracle cap only eigen residuals are produced.
pub fn convergence_report(
    op: &PropagationOperator,
    t: &Trajectory,
    tolerance: f64,
) -> Result<ConvergenceReport> {
    let cfg = t.config();
    match cfg.normalization {
        Normalization::None => {
            return Err(RfpError::UnsupportedDiagnostic(
                "trajectory has no normalized steps".into(),
            ))
        }
        Normalization::L2 if cfg.k > 1 => {
            return Err(RfpError::UnsupportedDiagnostic(
                "ℓ2-normalized blocks with k > 1 are not orthonormal".into(),
            ))
        }
        _ => {}
    }
    if t.node_count() != op.dim() {
        return Err(RfpError::DimensionMismatch(format!(
            "trajectory has {} nodes, operator dimension {}",
            t.node_count(),
            op.dim()
        )));
    }
    let k = cfg.k;
    let n = op.dim();

    let oracle = if n <= ORACLE_CAP {
        Some(full_spectrum(&op.dense_mirror()?))
    } else {
        None
    };
    let top = oracle.as_ref().map(|o| o.truncate(k));

    let mut per_step = Vec::new();
    let mut converged_at = None;
    for p in (1..t.steps().len()).filter(|&p| cfg.normalizes_at(p)) {
        let a = t.step(p);
        let eigen_residual = rayleigh_residual(op, a)?;
        let (angle, cosines) = match &top {
            Some(top) => {
                let angles = principal_angles(a, &top.vectors)?;
                let max = angles.iter().cloned().fold(0.0, f64::max);
                let aligned = sign_align(a, top);
                let cosines = (0..k)
                    .map(|c| dot(&aligned.column(c), &top.vector(c)).abs().min(1.0))
                    .collect();
                (Some(max), Some(cosines))
            }
            None => (None, None),
        };
        if converged_at.is_none() && angle.is_some_and(|x| x < tolerance) {
            converged_at = Some(p);
        }
        per_step.push(StepDiagnostics {
            step: p,
            max_principal_angle: angle,
            eigen_residual,
            per_column_cosines: cosines,
        });
    }

    let (oracle_values, oracle_gap, degenerate) = match &oracle {
        Some(o) => {
            let leading: Vec<f64> = o.values[..(k + 1).min(n)].to_vec();
            let gap = if k < n { magnitude_ratio(leading[k], leading[k - 1]) } else { 0.0 };
            let degenerate = leading
                .windows(2)
                .any(|w| magnitude_ratio(w[1], w[0]) > 1.0 - DEGENERACY_GAP);
            (Some(leading), Some(gap), degenerate)
        }
        None => (None, None, false),
    };

    Ok(ConvergenceReport {
        k,
        tolerance,
        per_step,
        oracle_values,
        oracle_gap,
        degenerate,
        converged_at,
    })
}

fn magnitude_ratio(smaller: f64, larger: f64) -> f64 {
    if larger == 0.0 {
        // 0/0: both vanish, treat as a tie
        1.0
    } else {
        smaller.abs() / larger.abs()
    }
}

fn rayleigh_residual(op: &PropagationOperator, a: &FeatureBlock) -> Result<f64> {
    let sa = spmm(op, a)?;
    let k = a.cols();
    let rayleigh: Vec<f64> = (0..k).map(|c| dot(&a.column(c), &sa.column(c))).collect();
    let mut sum = 0.0;
    for i in 0..a.rows() {
        for (c, lam) in rayleigh.iter().enumerate() {
            sum += (sa.get(i, c) - a.get(i, c) * lam).powi(2);
        }
    }
    Ok(sum.sqrt())
}

/// Per-step contraction factor estimated from a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    /// `exp(slope)` of the least-squares fit of `ln(angle)` against `p`.
    pub factor: f64,
    pub usable_steps: usize,
    /// The oracle spectrum is degenerate, so the factor has no meaning.
    pub unreliable: bool,
}

/// Fits `ln(max angle) ≈ a + p ln(ρ)` over steps with angle in `(1e-12, 0.5)`.
pub fn rate_fit(report: &ConvergenceReport) -> Result<RateEstimate> {
    let points: Vec<(f64, f64)> = report
        .per_step
        .iter()
        .filter_map(|s| {
            s.max_principal_angle
                .filter(|&a| a > 1e-12 && a < 0.5)
                .map(|a| (s.step as f64, a.ln()))
        })
        .collect();
    if points.len() < 5 {
        return Err(RfpError::InsufficientSteps { found: points.len() });
    }
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    Ok(RateEstimate {
        factor: (sxy / sxx).exp(),
        usable_steps: points.len(),
        unreliable: report.degenerate,
    })
}

/// Flips each column of `a` to correlate non-negatively with the oracle
/// vector of the same index.
pub fn sign_align(a: &FeatureBlock, oracle: &EigenPairs) -> FeatureBlock {
    let mut out = a.clone();
    for c in 0..a.cols().min(oracle.len()) {
        let col = a.column(c);
        if dot(&col, &oracle.vector(c)) < 0.0 {
            out.set_column(c, &col.iter().map(|x| -x).collect::<Vec<_>>());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_trajectory, RfpConfig};
    use crate::graph::Graph;
    use crate::linalg::dense_sym_eigen;

    fn qr_config(k: usize, steps: usize, seed: u64) -> RfpConfig {
        RfpConfig {
            k,
            steps,
            normalization: Normalization::Qr,
            seed,
            ..RfpConfig::default()
        }
    }

    fn path3() -> PropagationOperator {
        // Ã = [[1,1,0],[1,1,1],[0,1,1]] has det −1, so Â is nonsingular
        PropagationOperator::sym_norm_adjacency(&Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap())
    }

    #[test]
    fn full_space_converges_immediately() {
        let op = path3();
        let t = run_trajectory(&op, &qr_config(3, 20, 1), 0).unwrap();
        let r = convergence_report(&op, &t, 1e-6).unwrap();
        assert_eq!(r.per_step.len(), 20);
        assert!(r.final_angle().unwrap() < 1e-6);
        assert_eq!(r.converged_at, Some(1));
        assert_eq!(r.oracle_gap, Some(0.0));
        assert!(!r.degenerate);
        assert!(r.certified());
    }

    #[test]
    fn triangle_laplacian_is_degenerate() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let op = PropagationOperator::sym_norm_laplacian(&g);
        let t = run_trajectory(&op, &qr_config(2, 5, 1), 0).unwrap();
        let r = convergence_report(&op, &t, 1e-6).unwrap();
        assert!(r.degenerate);
        assert!(!r.certified());
    }

    #[test]
    fn exact_eigenvectors_have_zero_angle_and_residual() {
        let mut rng = crate::rng::keyed_rng(4, 0);
        let g = crate::graph::erdos_renyi(25, 0.3, &mut rng);
        let op = PropagationOperator::sym_norm_adjacency(&g);
        let oracle = dense_sym_eigen(&op.dense_mirror().unwrap(), 3).unwrap();
        let a = oracle.vectors.clone();
        assert!(rayleigh_residual(&op, &a).unwrap() <= 1e-8);
        assert!(principal_angles(&a, &oracle.vectors).unwrap().iter().all(|&x| x <= 1e-12));
    }

    #[test]
    fn unnormalized_trajectory_rejected() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let op = PropagationOperator::sym_norm_adjacency(&g);
        let cfg = RfpConfig {
            normalization: Normalization::None,
            ..RfpConfig::default()
        };
        let t = run_trajectory(&op, &cfg, 0).unwrap();
        assert!(matches!(
            convergence_report(&op, &t, 1e-6),
            Err(RfpError::UnsupportedDiagnostic(_))
        ));
    }

    #[test]
    fn rate_on_two_level_diagonal() {
        let op = PropagationOperator::diagonal(&[1.0, 0.5]).unwrap();
        let cfg = RfpConfig {
            steps: 60,
            seed: 8,
            ..RfpConfig::default()
        };
        let t = run_trajectory(&op, &cfg, 0).unwrap();
        let r = convergence_report(&op, &t, 1e-6).unwrap();
        let fit = rate_fit(&r).unwrap();
        assert!((fit.factor - 0.5).abs() <= 0.2 * 0.5, "{fit:?}");
        assert!(!fit.unreliable);
    }

    #[test]
    fn rate_fit_needs_usable_steps() {
        let op = path3();
        let t = run_trajectory(&op, &qr_config(3, 20, 1), 0).unwrap();
        let r = convergence_report(&op, &t, 1e-6).unwrap();
        assert!(matches!(rate_fit(&r), Err(RfpError::InsufficientSteps { .. })));
    }

    #[test]
    fn degenerate_fit_flagged() {
        let op = PropagationOperator::diagonal(&[1.0, 1.0, 0.5, 0.1]).unwrap();
        let t = run_trajectory(&op, &qr_config(1, 80, 2), 0).unwrap();
        let mut r = convergence_report(&op, &t, 1e-6).unwrap();
        assert!(r.degenerate);
        // synthetic usable angles so the fit runs
        for (i, s) in r.per_step.iter_mut().enumerate() {
            s.max_principal_angle = Some(0.4 * 0.5f64.powi(i as i32));
        }
        let fit = rate_fit(&r).unwrap();
        assert!(fit.unreliable);
        assert!((fit.factor - 0.5).abs() < 1e-9);
    }

    #[test]
    fn sign_alignment() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let m = PropagationOperator::sym_norm_adjacency(&g).dense_mirror().unwrap();
        let oracle = dense_sym_eigen(&m, 2).unwrap();
        let flipped = oracle.vectors.scale(-1.0);
        let aligned = sign_align(&flipped, &oracle);
        assert!(aligned.sub(&oracle.vectors).unwrap().max_abs() <= 1e-12);
        assert_eq!(sign_align(&oracle.vectors, &oracle), oracle.vectors);
        let mut mixed = oracle.vectors.clone();
        mixed.set_column(1, &oracle.vector(1).iter().map(|x| -x).collect::<Vec<_>>());
        let aligned = sign_align(&mixed, &oracle);
        for c in 0..2 {
            assert!(dot(&aligned.column(c), &oracle.vector(c)) >= 0.0);
        }
    }

    #[test]
    fn singular_full_space_collapses() {
        // single edge: Â = [[.5,.5],[.5,.5]] maps any block onto one line
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let op = PropagationOperator::sym_norm_adjacency(&g);
        assert_eq!(
            run_trajectory(&op, &qr_config(2, 20, 1), 0),
            Err(RfpError::RankCollapse { column: 1 })
        );
    }
}
