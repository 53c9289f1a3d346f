//! Random feature propagation.
//!
//! A trajectory starts from a random block `r` and repeatedly propagates it
//! through a sparse operator `S`, normalizing every `w`-th step:
//!
//! ```text
//! a(0) = r
//! â(p) = S a(p−1)
//! a(p) = N(â(p))   if p mod w == 0
//!        â(p)      otherwise
//! ```
//!
//! The positional encoding is the channel-wise concatenation
//! `r ⊕ a(1) ⊕ … ⊕ a(P)`. With ℓ2 normalization and `w = 1` each channel runs
//! the power method; with QR it runs subspace iteration.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Result, RfpError};
use crate::linalg::{normalize_l2, normalize_qr, spmm, FeatureBlock};
use crate::operator::PropagationOperator;
use crate::rng::InitDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Unit ℓ2 norm per channel.
    #[default]
    L2,
    /// Householder orthonormalization of the whole block.
    Qr,
    None,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::L2 => "l2",
            Normalization::Qr => "qr",
            Normalization::None => "none",
        }
    }

    pub fn apply(self, x: &FeatureBlock) -> Result<FeatureBlock> {
        match self {
            Normalization::L2 => normalize_l2(x),
            Normalization::Qr => normalize_qr(x),
            Normalization::None => Ok(x.clone()),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = RfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(Normalization::L2),
            "qr" => Ok(Normalization::Qr),
            "none" => Ok(Normalization::None),
            other => Err(RfpError::InvalidConfig(format!("unknown normalization {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RfpConfig {
    /// Channels per trajectory.
    pub k: usize,
    /// Propagation steps `P`.
    pub steps: usize,
    /// Normalization period `w`.
    pub norm_every: usize,
    pub normalization: Normalization,
    pub distribution: InitDistribution,
    pub seed: u64,
    /// Number of trajectories `B`.
    pub trajectories: usize,
}

impl Default for RfpConfig {
    fn default() -> Self {
        Self {
            k: 1,
            steps: 1,
            norm_every: 1,
            normalization: Normalization::L2,
            distribution: InitDistribution::StandardNormal,
            seed: 0,
            trajectories: 1,
        }
    }
}

impl RfpConfig {
    /// Checks the configuration against a graph with `n` nodes.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(RfpError::InvalidConfig("k must be at least 1".into()));
        }
        if self.k > n {
            return Err(RfpError::InvalidConfig(format!(
                "k = {} exceeds the node count {n}",
                self.k
            )));
        }
        if self.steps == 0 {
            return Err(RfpError::InvalidConfig("at least one propagation step is required".into()));
        }
        if self.norm_every == 0 {
            return Err(RfpError::InvalidConfig("normalization period must be at least 1".into()));
        }
        if self.trajectories == 0 {
            return Err(RfpError::InvalidConfig("at least one trajectory is required".into()));
        }
        Ok(())
    }

    /// Whether step `p` is normalized.
    pub fn normalizes_at(&self, p: usize) -> bool {
        self.normalization != Normalization::None && p > 0 && p.is_multiple_of(self.norm_every)
    }

    /// Width of one trajectory's concatenation, `k (P + 1)`.
    pub fn trajectory_width(&self) -> usize {
        self.k * (self.steps + 1)
    }
}

/// The blocks `[r, a(1), …, a(P)]` of one trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    steps: Vec<FeatureBlock>,
    config: RfpConfig,
    index: usize,
    concat: OnceLock<FeatureBlock>,
}

impl PartialEq for Trajectory {
    fn eq(&self, other: &Self) -> bool {
        self.steps == other.steps && self.config == other.config && self.index == other.index
    }
}

impl Trajectory {
    pub fn steps(&self) -> &[FeatureBlock] {
        &self.steps
    }

    pub fn step(&self, p: usize) -> &FeatureBlock {
        &self.steps[p]
    }

    pub fn config(&self) -> &RfpConfig {
        &self.config
    }

    /// Trajectory index `b` within its set.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn node_count(&self) -> usize {
        self.steps[0].rows()
    }

    /// `r ⊕ a(1) ⊕ … ⊕ a(P)`, assembled on first use.
    pub fn concat(&self) -> &FeatureBlock {
        self.concat.get_or_init(|| {
            let refs: Vec<&FeatureBlock> = self.steps.iter().collect();
            FeatureBlock::hstack(&refs).expect("steps share a row count")
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    trajectories: Vec<Trajectory>,
    config: RfpConfig,
}

impl TrajectorySet {
    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn config(&self) -> &RfpConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.trajectories[0].node_count()
    }
}

/// Initial block of trajectory `b`, drawn from stream `(cfg.seed, b)`.
pub fn sample_init(cfg: &RfpConfig, n: usize, b: usize) -> Result<FeatureBlock> {
    cfg.validate(n)?;
    if b >= cfg.trajectories {
        return Err(RfpError::InvalidConfig(format!(
            "trajectory index {b} out of range for {} trajectories",
            cfg.trajectories
        )));
    }
    Ok(cfg.distribution.sample_block(cfg.seed, b as u64, n, cfg.k))
}

/// One propagate-then-maybe-normalize step producing `a(p)` from `a(p−1)`.
pub fn rfp_step(
    op: &PropagationOperator,
    a_prev: &FeatureBlock,
    p: usize,
    cfg: &RfpConfig,
) -> Result<FeatureBlock> {
    let propagated = spmm(op, a_prev)?;
    if cfg.normalizes_at(p) {
        cfg.normalization.apply(&propagated)
    } else {
        Ok(propagated)
    }
}

pub fn run_trajectory(op: &PropagationOperator, cfg: &RfpConfig, b: usize) -> Result<Trajectory> {
    let n = op.dim();
    let mut steps = Vec::with_capacity(cfg.steps + 1);
    steps.push(sample_init(cfg, n, b)?);
    for p in 1..=cfg.steps {
        let next = rfp_step(op, &steps[p - 1], p, cfg)?;
        if !next.is_finite() {
            return Err(RfpError::NumericOverflow { step: p });
        }
        steps.push(next);
    }
    Ok(Trajectory {
        steps,
        config: *cfg,
        index: b,
        concat: OnceLock::new(),
    })
}

/// All `B` trajectories, computed on the current rayon pool.
pub fn run_trajectory_set(op: &PropagationOperator, cfg: &RfpConfig) -> Result<TrajectorySet> {
    cfg.validate(op.dim())?;
    let trajectories = (0..cfg.trajectories)
        .into_par_iter()
        .map(|b| run_trajectory(op, cfg, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectorySet {
        trajectories,
        config: *cfg,
    })
}

/// [`run_trajectory_set`] on a dedicated pool of `workers` threads.
pub fn run_trajectory_set_with_workers(
    op: &PropagationOperator,
    cfg: &RfpConfig,
    workers: usize,
) -> Result<TrajectorySet> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RfpError::InvalidConfig(e.to_string()))?;
    pool.install(|| run_trajectory_set(op, cfg))
}

/// `f_in ⊕ t_1 ⊕ … ⊕ t_B`, with trajectories in index order.
pub fn assemble_features(f_in: Option<&FeatureBlock>, t: &TrajectorySet) -> Result<FeatureBlock> {
    let n = t.node_count();
    let mut parts: Vec<&FeatureBlock> = Vec::with_capacity(t.len() + 1);
    if let Some(f) = f_in {
        if f.rows() != n {
            return Err(RfpError::DimensionMismatch(format!(
                "input features have {} rows, trajectories have {n}",
                f.rows()
            )));
        }
        parts.push(f);
    }
    let mut ordered: Vec<&Trajectory> = t.trajectories.iter().collect();
    ordered.sort_by_key(|tr| tr.index);
    parts.extend(ordered.into_iter().map(Trajectory::concat));
    FeatureBlock::hstack(&parts)
}
