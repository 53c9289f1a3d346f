use std::collections::BTreeMap;
use std::fmt::Write;

use sha2::{Digest, Sha256};

use crate::engine::RfpConfig;
use crate::error::{Result, RfpError};
use crate::operator::OperatorKind;

/// Flat `key=value` record of a positional-encoding run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub graph_path: String,
    pub graph_sha256: String,
    pub operator: OperatorKind,
    pub config: RfpConfig,
    pub features_path: Option<String>,
    pub format: String,
    pub version: String,
    pub wall_time_ms: u128,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| writeln!(out, "{k}={v}").unwrap();
        kv("version", &self.version);
        kv("graph", &self.graph_path);
        kv("graph_sha256", &self.graph_sha256);
        kv("operator", &self.operator);
        kv("k", &c.k);
        kv("steps", &c.steps);
        kv("norm", &c.normalization);
        kv("norm_every", &c.norm_every);
        kv("dist", &c.distribution);
        kv("trajectories", &c.trajectories);
        kv("seed", &c.seed);
        kv("features", &self.features_path.as_deref().unwrap_or(""));
        kv("format", &self.format);
        kv("wall_time_ms", &self.wall_time_ms);
        kv("outputs", &self.outputs.join(","));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let map: BTreeMap<&str, &str> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_once('=')
                    .ok_or_else(|| RfpError::Format(format!("manifest line without '=': {l:?}")))
            })
            .collect::<Result<_>>()?;
        let get = |k: &str| {
            map.get(k)
                .copied()
                .ok_or_else(|| RfpError::Format(format!("manifest missing {k}")))
        };
        let num = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| RfpError::Format(format!("manifest field {k} is not an integer")))
        };
        let operator = match get("operator")? {
            "custom" => OperatorKind::Custom,
            other => other.parse()?,
        };
        let features = get("features")?;
        Ok(Self {
            graph_path: get("graph")?.to_string(),
            graph_sha256: get("graph_sha256")?.to_string(),
            operator,
            config: RfpConfig {
                k: num("k")? as usize,
                steps: num("steps")? as usize,
                norm_every: num("norm_every")? as usize,
                normalization: get("norm")?.parse()?,
                distribution: get("dist")?.parse()?,
                seed: num("seed")?,
                trajectories: num("trajectories")? as usize,
            },
            features_path: (!features.is_empty()).then(|| features.to_string()),
            format: get("format")?.to_string(),
            version: get("version")?.to_string(),
            wall_time_ms: num("wall_time_ms")? as u128,
            outputs: get("outputs")?
                .split(',')
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect(),
        })
    }

    /// `pe` arguments that regenerate the run, writing to `out`.
    pub fn pe_args(&self, out: &str) -> Vec<String> {
        let c = &self.config;
        let mut args: Vec<String> = [
            "pe",
            "--graph",
            &self.graph_path,
            "--operator",
            self.operator.as_str(),
            "--k",
            &c.k.to_string(),
            "--steps",
            &c.steps.to_string(),
            "--norm",
            c.normalization.as_str(),
            "--norm-every",
            &c.norm_every.to_string(),
            "--dist",
            c.distribution.as_str(),
            "--trajectories",
            &c.trajectories.to_string(),
            "--seed",
            &c.seed.to_string(),
            "--format",
            &self.format,
            "--out",
            out,
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        if let Some(f) = &self.features_path {
            args.push("--features".into());
            args.push(f.clone());
        }
        args
    }
}
