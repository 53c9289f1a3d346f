//! CSV features: header `node,c0,c1,…`, then one row per node.
//!
//! Values use Rust's shortest round-trip formatting, so parsing a written
//! file returns the original numbers.

use std::fmt::Write;

use crate::error::{Result, RfpError};
use crate::linalg::FeatureBlock;

pub fn encode(block: &FeatureBlock) -> String {
    let mut out = String::from("node");
    for c in 0..block.cols() {
        write!(out, ",c{c}").unwrap();
    }
    out.push('\n');
    for i in 0..block.rows() {
        write!(out, "{i}").unwrap();
        for v in block.row(i) {
            write!(out, ",{v:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn decode(text: &str) -> Result<FeatureBlock> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| RfpError::Format("empty CSV feature file".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.first() != Some(&"node") || columns.len() < 2 {
        return Err(RfpError::Format("CSV header must be node,c0,c1,…".into()));
    }
    let width = columns.len() - 1;
    let mut data = Vec::new();
    let mut rows = 0;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width + 1 {
            return Err(RfpError::Parse {
                line: line_no,
                message: format!("expected {} fields, found {}", width + 1, fields.len()),
            });
        }
        if fields[0].parse::<usize>().ok() != Some(rows) {
            return Err(RfpError::Parse {
                line: line_no,
                message: format!("expected node {rows}, found {:?}", fields[0]),
            });
        }
        for f in &fields[1..] {
            data.push(f.parse::<f64>().map_err(|_| RfpError::Parse {
                line: line_no,
                message: format!("invalid number {f:?}"),
            })?);
        }
        rows += 1;
    }
    FeatureBlock::new(rows, width, data)
}
