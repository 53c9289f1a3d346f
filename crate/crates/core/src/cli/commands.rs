use std::io::Write;
use std::path::Path;
use std::time::Instant;

use super::{exit, CountArgs, CountMode, CountWhat, DistArg, EigcheckArgs, FormatArg, NormArg, OperatorArg, PeArgs};
use crate::counting::{
    closed_walks, count_with_guarantee, hutchinson_trace, quadrangle_exact, required_samples, spectral_rho,
    triangle_estimate, triangle_exact, RANK_EPSILON,
};
use crate::diagnostics::convergence_report;
use crate::engine::{assemble_features, run_trajectory, run_trajectory_set, Normalization, RfpConfig};
use crate::error::{Result, RfpError};
use crate::graph::Graph;
use crate::io::manifest::sha256_hex;
use crate::io::{self, read_features, write_atomic, RunManifest};
use crate::linalg::eigen::full_spectrum;
use crate::operator::{OperatorKind, PropagationOperator, ORACLE_CAP};
use crate::rng::InitDistribution;

impl From<OperatorArg> for OperatorKind {
    fn from(a: OperatorArg) -> Self {
        match a {
            OperatorArg::AdjNorm => OperatorKind::SymNormAdjacency,
            OperatorArg::LapNorm => OperatorKind::SymNormLaplacian,
            OperatorArg::AdjRaw => OperatorKind::RawAdjacency,
        }
    }
}

impl From<NormArg> for Normalization {
    fn from(a: NormArg) -> Self {
        match a {
            NormArg::L2 => Normalization::L2,
            NormArg::Qr => Normalization::Qr,
            NormArg::None => Normalization::None,
        }
    }
}

impl From<DistArg> for InitDistribution {
    fn from(a: DistArg) -> Self {
        match a {
            DistArg::Normal => InitDistribution::StandardNormal,
            DistArg::Rademacher => InitDistribution::Rademacher,
        }
    }
}

fn read_graph_bytes(path: &Path) -> Result<(Graph, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|e| RfpError::Io(format!("{}: {e}", path.display())))?;
    let graph = crate::graph::load_edge_list(bytes.as_slice())?;
    Ok((graph, bytes))
}

pub(super) fn pe(args: &PeArgs, _out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let (graph, graph_bytes) = read_graph_bytes(&args.graph)?;
    let cfg = RfpConfig {
        k: args.k,
        steps: args.steps,
        norm_every: args.norm_every,
        normalization: args.norm.into(),
        distribution: args.dist.into(),
        seed: args.seed,
        trajectories: args.trajectories,
    };
    cfg.validate(graph.node_count())?;
    let f_in = args.features.as_deref().map(read_features).transpose()?;

    let op = PropagationOperator::build(&graph, args.operator.into())?;
    let set = run_trajectory_set(&op, &cfg)?;
    let features = assemble_features(f_in.as_ref(), &set)?;

    let (bytes, format) = match args.format {
        FormatArg::Rfpf => (io::rfpf::encode(&features), "rfpf"),
        FormatArg::Csv => (io::csv::encode(&features).into_bytes(), "csv"),
    };
    write_atomic(&args.out, &bytes)?;

    let manifest_path = manifest_path(&args.out);
    let manifest = RunManifest {
        graph_path: args.graph.display().to_string(),
        graph_sha256: sha256_hex(&graph_bytes),
        operator: op.kind(),
        config: cfg,
        features_path: args.features.as_ref().map(|p| p.display().to_string()),
        format: format.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_ms: started.elapsed().as_millis(),
        outputs: vec![args.out.display().to_string(), manifest_path.display().to_string()],
    };
    write_atomic(&manifest_path, manifest.to_text().as_bytes())?;
    Ok(exit::OK)
}

/// Manifest written next to a feature file.
pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    name.into()
}

pub(super) fn eigcheck(args: &EigcheckArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32> {
    let (graph, _) = read_graph_bytes(&args.graph)?;
    let n = graph.node_count();
    if n > ORACLE_CAP {
        return Err(RfpError::OracleCapExceeded { n, cap: ORACLE_CAP });
    }
    let cfg = RfpConfig {
        k: args.k,
        steps: args.steps,
        norm_every: 1,
        normalization: Normalization::Qr,
        distribution: InitDistribution::StandardNormal,
        seed: args.seed,
        trajectories: 1,
    };
    cfg.validate(n)?;
    let op = PropagationOperator::build(&graph, args.operator.into())?;
    let t = run_trajectory(&op, &cfg, 0)?;
    let report = convergence_report(&op, &t, args.tolerance)?;

    writeln!(out, "p\tmax_angle\tresidual")?;
    for s in &report.per_step {
        writeln!(
            out,
            "{}\t{:e}\t{:e}",
            s.step,
            s.max_principal_angle.unwrap_or(f64::NAN),
            s.eigen_residual
        )?;
    }
    if let Some(values) = &report.oracle_values {
        let joined: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "oracle_values={}", joined.join(","))?;
    }
    writeln!(out, "oracle_gap={:?}", report.oracle_gap.unwrap_or(f64::NAN))?;
    writeln!(out, "degenerate={}", report.degenerate)?;
    match report.converged_at {
        Some(p) => writeln!(out, "converged_at={p}")?,
        None => writeln!(out, "converged_at=none")?,
    }
    writeln!(out, "certified={}", report.certified())?;
    Ok(if report.certified() { exit::OK } else { exit::NOT_CONVERGED })
}

pub(super) fn count(args: &CountArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (graph, _) = read_graph_bytes(&args.graph)?;
    let n = graph.node_count();
    let what = match args.what {
        CountWhat::Triangles => "triangles",
        CountWhat::Quadrangles => "quadrangles",
        CountWhat::Walks => "walks",
    };
    writeln!(out, "what={what}")?;
    if args.mode == CountMode::Guaranteed && n > ORACLE_CAP {
        return Err(RfpError::OracleCapExceeded { n, cap: ORACLE_CAP });
    }
    let raw = PropagationOperator::raw_adjacency(&graph);

    match (args.what, args.mode) {
        (CountWhat::Triangles, CountMode::Exact) => {
            writeln!(out, "exact={}", triangle_exact(&graph)?)?;
        }
        (CountWhat::Triangles, CountMode::Estimate) => {
            let r = triangle_estimate(&graph, args.samples, args.seed)?;
            writeln!(out, "estimate={:?}", r.estimate)?;
            writeln!(out, "m_used={}", r.m_used)?;
        }
        (CountWhat::Triangles, CountMode::Guaranteed) => {
            let r = count_with_guarantee(&graph, args.epsilon, args.delta, args.seed)?;
            writeln!(out, "estimate={:?}", r.estimate)?;
            if let Some(e) = r.exact {
                writeln!(out, "exact={e}")?;
            }
            writeln!(out, "m_used={}", r.m_used)?;
            writeln!(out, "epsilon={:?}", args.epsilon)?;
            writeln!(out, "delta={:?}", args.delta)?;
            if let Some(rank) = r.rank {
                writeln!(out, "rank={rank}")?;
            }
            match (r.rho, r.m_required) {
                (Some(rho), Some(m)) => {
                    writeln!(out, "rho={rho:?}")?;
                    writeln!(out, "m_required={m}")?;
                }
                _ => writeln!(out, "m_required=none")?,
            }
            if let Some(w) = &r.warning {
                writeln!(out, "warning={w}")?;
                writeln!(err, "warning: {w}")?;
            }
        }
        (CountWhat::Quadrangles, CountMode::Exact) => {
            writeln!(out, "exact={}", quadrangle_exact(&graph)?)?;
        }
        (CountWhat::Quadrangles, CountMode::Estimate) => {
            // trace(A²) and Σ deg² are exact; only trace(A⁴) is sampled
            let h = hutchinson_trace(&raw, 4, args.samples, args.seed)?;
            let degrees = graph.degrees();
            let trace2: f64 = degrees.iter().map(|&d| d as f64).sum();
            let sum_sq: f64 = degrees.iter().map(|&d| (d * d) as f64).sum();
            writeln!(out, "estimate={:?}", (h.value + trace2 - 2.0 * sum_sq) / 8.0)?;
            writeln!(out, "m_used={}", h.samples)?;
        }
        (CountWhat::Quadrangles, CountMode::Guaranteed) => {
            return Err(RfpError::InvalidConfig(
                "guaranteed mode is available for triangles and walks".into(),
            ));
        }
        (CountWhat::Walks, mode) => {
            let length = args
                .walk_length
                .ok_or_else(|| RfpError::InvalidConfig("--walk-length is required for walks".into()))?;
            if length == 0 {
                return Err(RfpError::InvalidConfig("--walk-length must be at least 1".into()));
            }
            match mode {
                CountMode::Exact => writeln!(out, "exact={}", closed_walks(&graph, length)?)?,
                CountMode::Estimate => {
                    let h = hutchinson_trace(&raw, length, args.samples, args.seed)?;
                    writeln!(out, "estimate={:?}", h.value)?;
                    writeln!(out, "m_used={}", h.samples)?;
                }
                CountMode::Guaranteed => {
                    let rho = spectral_rho(&raw, length)?;
                    let spectrum = full_spectrum(&raw.dense_mirror()?);
                    let rank = spectrum
                        .values
                        .iter()
                        .filter(|l| l.powi(length as i32).abs() > RANK_EPSILON)
                        .count();
                    let m = required_samples(args.epsilon, args.delta, rho, rank)?;
                    let h = hutchinson_trace(&raw, length, m as usize, args.seed)?;
                    writeln!(out, "estimate={:?}", h.value)?;
                    writeln!(out, "exact={}", closed_walks(&graph, length)?)?;
                    writeln!(out, "m_used={}", h.samples)?;
                    writeln!(out, "epsilon={:?}", args.epsilon)?;
                    writeln!(out, "delta={:?}", args.delta)?;
                    writeln!(out, "rank={rank}")?;
                    writeln!(out, "rho={rho:?}")?;
                    writeln!(out, "m_required={m}")?;
                }
            }
        }
    }
    Ok(exit::OK)
}
