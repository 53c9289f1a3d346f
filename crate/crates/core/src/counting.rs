//! Randomized trace estimation and exact substructure counts.
//!
//! Triangles are estimated from unnormalized Rademacher trajectories over the
//! raw adjacency matrix: with `a(1) = A r` and `a(2) = A² r`, the product
//! `a(1)ᵀ a(2) = rᵀ A³ r` is one Hutchinson sample of `trace(A³) = 6 c₃`.

use rayon::prelude::*;

use crate::engine::{run_trajectory, Normalization, RfpConfig};
use crate::error::{Result, RfpError};
use crate::graph::Graph;
use crate::linalg::dense::dot;
use crate::linalg::eigen::full_spectrum;
use crate::linalg::Matrix;
use crate::operator::{OperatorKind, PropagationOperator, ORACLE_CAP};
use crate::rng::{rademacher_probe, InitDistribution};

/// Eigenvalues of `A³` above this magnitude count toward its rank.
pub const RANK_EPSILON: f64 = 1e-8;

/// `|trace|` at or below this leaves `ρ` undefined.
pub const TRACE_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEstimate {
    pub value: f64,
    pub samples: usize,
    pub per_sample: Vec<f64>,
    pub power: usize,
    pub operator_kind: OperatorKind,
    pub exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountResult {
    pub estimate: f64,
    pub exact: Option<u64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub m_used: usize,
    pub m_required: Option<u64>,
    pub rho: Option<f64>,
    pub rank: Option<usize>,
    pub per_sample: Vec<f64>,
    pub warning: Option<String>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Hutchinson estimate `(1/M) Σ zᵢᵀ S^P zᵢ` with Rademacher probes keyed by
/// `(seed, i)`. Each sample is `(S^⌈P/2⌉ z) · (S^⌊P/2⌋ z)`, built from sparse
/// products only.
pub fn hutchinson_trace(
    op: &PropagationOperator,
    power: usize,
    samples: usize,
    seed: u64,
) -> Result<TraceEstimate> {
    if power == 0 {
        return Err(RfpError::OutOfRange("power must be at least 1".into()));
    }
    if samples == 0 {
        return Err(RfpError::OutOfRange("at least one sample is required".into()));
    }
    let n = op.dim();
    let per_sample = (0..samples)
        .into_par_iter()
        .map(|i| {
            let z = Matrix::from_raw(n, 1, rademacher_probe(seed, i as u64, n));
            let mut low = z;
            for _ in 0..power / 2 {
                low = op.apply(&low)?;
            }
            let high = if power % 2 == 1 { op.apply(&low)? } else { low.clone() };
            Ok(dot(low.data(), high.data()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(TraceEstimate {
        value: mean(&per_sample),
        samples,
        per_sample,
        power,
        operator_kind: op.kind(),
        exact: None,
    })
}

/// Monte Carlo triangle count from `samples` Rademacher trajectories.
pub fn triangle_estimate(g: &Graph, samples: usize, seed: u64) -> Result<CountResult> {
    if samples == 0 {
        return Err(RfpError::OutOfRange("at least one sample is required".into()));
    }
    if g.node_count() == 0 {
        return Ok(CountResult {
            m_used: samples,
            per_sample: vec![0.0; samples],
            ..CountResult::default()
        });
    }
    let op = PropagationOperator::raw_adjacency(g);
    let cfg = RfpConfig {
        k: 1,
        steps: 2,
        norm_every: 1,
        normalization: Normalization::None,
        distribution: InitDistribution::Rademacher,
        seed,
        trajectories: samples,
    };
    let traces = (0..samples)
        .into_par_iter()
        .map(|b| {
            let t = run_trajectory(&op, &cfg, b)?;
            Ok(dot(t.step(1).data(), t.step(2).data()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CountResult {
        estimate: mean(&traces) / 6.0,
        m_used: samples,
        per_sample: traces.iter().map(|x| x / 6.0).collect(),
        ..CountResult::default()
    })
}

/// Exact triangle count, by neighbor-list intersection and (under the oracle
/// cap) by `trace(A³)/6`; the two must agree.
pub fn triangle_exact(g: &Graph) -> Result<u64> {
    let enumerated = triangles_by_intersection(g);
    if g.node_count() <= ORACLE_CAP {
        let trace = trace_cubed(g);
        if !trace.is_multiple_of(6) || trace / 6 != enumerated {
            return Err(RfpError::InternalConsistency(format!(
                "trace(A³) = {trace} but {enumerated} triangles enumerated"
            )));
        }
    }
    Ok(enumerated)
}

fn triangles_by_intersection(g: &Graph) -> u64 {
    let mut count = 0u64;
    for u in 0..g.node_count() {
        let nu = g.neighbors(u);
        for &v in nu.iter().filter(|&&v| v > u) {
            let nv = g.neighbors(v);
            let (mut i, mut j) = (0, 0);
            while i < nu.len() && j < nv.len() {
                match nu[i].cmp(&nv[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        if nu[i] > v {
                            count += 1;
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    count
}

/// `trace(A³) = Σ_u Σ_{v ∈ N(u)} (A²)_{uv}`, one dense row of `A²` at a time.
fn trace_cubed(g: &Graph) -> u64 {
    let n = g.node_count();
    let mut row = vec![0u64; n];
    let mut total = 0u64;
    for u in 0..n {
        row.iter_mut().for_each(|x| *x = 0);
        for &w in g.neighbors(u) {
            for &v in g.neighbors(w) {
                row[v] += 1;
            }
        }
        total += g.neighbors(u).iter().map(|&v| row[v]).sum::<u64>();
    }
    total
}

/// Exact 4-cycle count `(trace(A⁴) + trace(A²) − 2 Σ deg²) / 8`.
pub fn quadrangle_exact(g: &Graph) -> Result<u64> {
    let n = g.node_count();
    if n > ORACLE_CAP {
        return Err(RfpError::OracleCapExceeded { n, cap: ORACLE_CAP });
    }
    let degrees = g.degrees();
    let trace2: f64 = degrees.iter().map(|&d| d as f64).sum();
    let sum_deg_sq: f64 = degrees.iter().map(|&d| (d * d) as f64).sum();
    // trace(A⁴) = ‖A²‖_F²
    let mut trace4 = 0.0;
    let mut row = vec![0.0f64; n];
    for u in 0..n {
        row.iter_mut().for_each(|x| *x = 0.0);
        for &w in g.neighbors(u) {
            for &v in g.neighbors(w) {
                row[v] += 1.0;
            }
        }
        trace4 += row.iter().map(|x| x * x).sum::<f64>();
    }
    let raw = (trace4 + trace2 - 2.0 * sum_deg_sq) / 8.0;
    let rounded = raw.round();
    if (rounded - raw).abs() > 1e-6 || rounded < 0.0 {
        return Err(RfpError::InternalConsistency(format!(
            "quadrangle closed form produced {raw}"
        )));
    }
    Ok(rounded as u64)
}

/// Exact `trace(A^P)`, the number of closed walks of length `P`.
pub fn closed_walks(g: &Graph, length: usize) -> Result<u64> {
    let n = g.node_count();
    if n > ORACLE_CAP {
        return Err(RfpError::OracleCapExceeded { n, cap: ORACLE_CAP });
    }
    if length == 0 {
        return Err(RfpError::OutOfRange("walk length must be at least 1".into()));
    }
    let overflow = || RfpError::Overflow(format!("trace(A^{length}) exceeds 64-bit range"));
    // powers = A^p, row-major; start from A itself
    let mut powers = vec![0u64; n * n];
    for (u, v) in g.edges() {
        powers[u * n + v] = 1;
        powers[v * n + u] = 1;
    }
    let mut next = vec![0u64; n * n];
    for _ in 1..length {
        for i in 0..n {
            let src = &powers[i * n..(i + 1) * n];
            let dst = &mut next[i * n..(i + 1) * n];
            for (j, slot) in dst.iter_mut().enumerate() {
                let mut acc = 0u64;
                for &l in g.neighbors(j) {
                    acc = acc.checked_add(src[l]).ok_or_else(overflow)?;
                }
                *slot = acc;
            }
        }
        std::mem::swap(&mut powers, &mut next);
    }
    (0..n).try_fold(0u64, |acc, i| acc.checked_add(powers[i * n + i]).ok_or_else(overflow))
}

/// Smallest `M ≥ 6 ε⁻² ρ² ln(2 rank / δ)`.
pub fn required_samples(epsilon: f64, delta: f64, rho: f64, rank: usize) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(RfpError::OutOfRange(format!("epsilon {epsilon} not in (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(RfpError::OutOfRange(format!("delta {delta} not in (0, 1)")));
    }
    if !(rho >= 1.0) || !rho.is_finite() {
        return Err(RfpError::OutOfRange(format!("rho {rho} below 1")));
    }
    if rank == 0 {
        return Err(RfpError::OutOfRange("rank must be at least 1".into()));
    }
    let bound = required_samples_bound(epsilon, delta, rho, rank);
    Ok(bound.ceil() as u64)
}

/// The real-valued sample bound before rounding up.
pub fn required_samples_bound(epsilon: f64, delta: f64, rho: f64, rank: usize) -> f64 {
    6.0 / (epsilon * epsilon) * rho * rho * (2.0 * rank as f64 / delta).ln()
}

fn powered_spectrum(op: &PropagationOperator, power: usize) -> Result<Vec<f64>> {
    let n = op.dim();
    if n > ORACLE_CAP {
        return Err(RfpError::OracleCapExceeded { n, cap: ORACLE_CAP });
    }
    let p = i32::try_from(power).map_err(|_| RfpError::OutOfRange("power too large".into()))?;
    Ok(full_spectrum(&op.dense_mirror()?)
        .values
        .iter()
        .map(|l| l.powi(p))
        .collect())
}

fn rho_from(powered: &[f64]) -> Result<f64> {
    let trace: f64 = powered.iter().sum();
    if trace.abs() <= TRACE_EPSILON {
        return Err(RfpError::UndefinedRho(trace));
    }
    Ok(powered.iter().map(|l| l.abs()).sum::<f64>() / trace)
}

/// `ρ(S^P) = Σ|λᵢ^P| / Σ λᵢ^P` from the dense oracle spectrum.
pub fn spectral_rho(op: &PropagationOperator, power: usize) -> Result<f64> {
    rho_from(&powered_spectrum(op, power)?)
}

/// Triangle estimate with the sample count that makes it an `(ε, δ)`
/// approximation of `c₃`.
pub fn count_with_guarantee(g: &Graph, epsilon: f64, delta: f64, seed: u64) -> Result<CountResult> {
    let op = PropagationOperator::raw_adjacency(g);
    let cubed = powered_spectrum(&op, 3)?;
    let rank = cubed.iter().filter(|l| l.abs() > RANK_EPSILON).count();
    let exact = triangle_exact(g)?;

    let (m_required, rho, warning, samples) = match rho_from(&cubed) {
        Ok(rho) => {
            let m = required_samples(epsilon, delta, rho, rank)?;
            (Some(m), Some(rho), None, m)
        }
        Err(RfpError::UndefinedRho(_)) => {
            let fallback = required_samples(epsilon, delta, 1.0, rank.max(1))?;
            (
                None,
                None,
                Some("graph has no triangles; relative-error guarantee does not apply".to_string()),
                fallback,
            )
        }
        Err(e) => return Err(e),
    };
    let samples = usize::try_from(samples)
        .map_err(|_| RfpError::OutOfRange("sample count exceeds address space".into()))?;

    let estimate = triangle_estimate(g, samples, seed)?;
    Ok(CountResult {
        exact: Some(exact),
        epsilon: Some(epsilon),
        delta: Some(delta),
        m_required,
        rho,
        rank: Some(rank),
        warning,
        ..estimate
    })
}
