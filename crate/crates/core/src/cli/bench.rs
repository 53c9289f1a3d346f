use std::io::Write;
use std::time::Instant;

use super::{exit, BenchArgs};
use crate::error::{Result, RfpError};
use crate::graph::random_regular;
use crate::linalg::spmm;
use crate::operator::PropagationOperator;
use crate::rng::{keyed_rng, InitDistribution};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub degree: usize,
    /// Best-of-repeats wall time for `steps` propagations, in seconds.
    pub seconds: f64,
    /// `seconds / (steps · m)` in nanoseconds.
    pub ns_per_step_per_edge: f64,
}

/// Parses `n:m,n:m,…`.
pub fn parse_sizes(spec: &str) -> Result<Vec<(usize, usize)>> {
    let sizes = spec
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (n, m) = pair
                .split_once(':')
                .ok_or_else(|| RfpError::InvalidConfig(format!("size {pair:?} is not n:m")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| RfpError::InvalidConfig(format!("bad number in size {pair:?}")))
            };
            let (n, m) = (parse(n)?, parse(m)?);
            if n == 0 || (2 * m) % n != 0 || 2 * m / n >= n || 2 * m / n == 0 {
                return Err(RfpError::InvalidConfig(format!(
                    "no regular graph with n={n}, m={m}"
                )));
            }
            Ok((n, m))
        })
        .collect::<Result<Vec<_>>>()?;
    if sizes.is_empty() {
        return Err(RfpError::InvalidConfig("no sizes given".into()));
    }
    Ok(sizes)
}

/// Times `steps` sparse propagations of an `n x k` Gaussian block through the
/// normalized adjacency of a random regular graph, for each `(n, m)`.
///
/// Repeats are interleaved across sizes so that drift in machine speed hits
/// every size alike; each size keeps its best repeat.
pub fn bench_propagation(
    sizes: &[(usize, usize)],
    k: usize,
    steps: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if k == 0 || steps == 0 || repeats == 0 {
        return Err(RfpError::InvalidConfig("k, steps and repeats must be positive".into()));
    }
    let cases = sizes
        .iter()
        .enumerate()
        .map(|(i, &(n, m))| {
            let g = random_regular(n, 2 * m / n, &mut keyed_rng(seed, i as u64))?;
            let op = PropagationOperator::sym_norm_adjacency(&g);
            let x0 = InitDistribution::StandardNormal.sample_block(seed, (sizes.len() + i) as u64, n, k);
            Ok((op, x0))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = vec![f64::INFINITY; sizes.len()];
    for _ in 0..repeats {
        for ((op, x0), best) in cases.iter().zip(best.iter_mut()) {
            let start = Instant::now();
            let mut x = x0.clone();
            for _ in 0..steps {
                x = spmm(op, &x)?;
            }
            std::hint::black_box(&x);
            *best = best.min(start.elapsed().as_secs_f64());
        }
    }
    Ok(sizes
        .iter()
        .zip(best)
        .map(|(&(n, m), seconds)| BenchRow {
            n,
            m,
            degree: 2 * m / n,
            seconds,
            ns_per_step_per_edge: seconds * 1e9 / (steps * m) as f64,
        })
        .collect())
}

pub(super) fn run(args: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let sizes = parse_sizes(&args.sizes)?;
    let rows = bench_propagation(&sizes, args.k, args.steps, args.repeats, args.seed)?;
    writeln!(out, "n\tm\tdegree\tseconds\tns_per_step_per_edge")?;
    for r in &rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{:.3}",
            r.n, r.m, r.degree, r.seconds, r.ns_per_step_per_edge
        )?;
    }
    if rows.len() > 1 {
        let per_edge: Vec<f64> = rows.iter().map(|r| r.ns_per_step_per_edge).collect();
        let max = per_edge.iter().cloned().fold(f64::MIN, f64::max);
        let min = per_edge.iter().cloned().fold(f64::MAX, f64::min);
        writeln!(out, "per_edge_ratio_max_min={:.3}", max / min)?;
        let (first, last) = (&rows[0], &rows[rows.len() - 1]);
        writeln!(out, "edge_ratio_last_first={:.3}", last.m as f64 / first.m as f64)?;
        writeln!(out, "time_ratio_last_first={:.3}", last.seconds / first.seconds)?;
    }
    Ok(exit::OK)
}
