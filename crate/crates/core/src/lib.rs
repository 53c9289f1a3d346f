//! Random feature propagation (RFP) for graph positional encodings.
//!
//! Random node features are propagated through a sparse graph operator and
//! periodically normalized; the concatenated trajectory is the encoding.
//! Besides the engine, the crate ships the machinery to check what those
//! trajectories compute: convergence diagnostics against a dense eigensolver,
//! and Hutchinson trace estimates for triangle, quadrangle and closed-walk
//! counts with exact oracles.

pub mod cli;
pub mod counting;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod rng;

pub use engine::{
    assemble_features, rfp_step, run_trajectory, run_trajectory_set, run_trajectory_set_with_workers, sample_init,
    Normalization, RfpConfig, Trajectory, TrajectorySet,
};
pub use error::{Result, RfpError};
pub use graph::Graph;
pub use linalg::{FeatureBlock, Matrix};
pub use operator::{OperatorKind, PropagationOperator, ORACLE_CAP};
pub use rng::InitDistribution;
