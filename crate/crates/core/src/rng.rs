//! Keyed random streams.
//!
//! Every random block in the toolkit is drawn from a ChaCha stream selected by
//! `(seed, index)`, so trajectory `b` (or probe `i`) can be regenerated alone
//! and parallel schedules never change the numbers.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::RfpError;
use crate::linalg::FeatureBlock;

pub fn keyed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitDistribution {
    #[default]
    StandardNormal,
    /// Uniform on {−1, +1}.
    Rademacher,
}

impl InitDistribution {
    pub fn as_str(self) -> &'static str {
        match self {
            InitDistribution::StandardNormal => "normal",
            InitDistribution::Rademacher => "rademacher",
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            InitDistribution::StandardNormal => rng.sample(StandardNormal),
            InitDistribution::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Row-major `rows x cols` block from stream `(seed, index)`.
    pub fn sample_block(self, seed: u64, index: u64, rows: usize, cols: usize) -> FeatureBlock {
        let mut rng = keyed_rng(seed, index);
        let data = (0..rows * cols).map(|_| self.sample(&mut rng)).collect();
        FeatureBlock::from_raw(rows, cols, data)
    }
}

impl fmt::Display for InitDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitDistribution {
    type Err = RfpError;

    fn from_str(s: &str) -> Result<Self, RfpError> {
        match s {
            "normal" => Ok(InitDistribution::StandardNormal),
            "rademacher" => Ok(InitDistribution::Rademacher),
            other => Err(RfpError::InvalidConfig(format!("unknown distribution {other:?}"))),
        }
    }
}

/// Rademacher probe vector number `index` for seed `seed`.
pub fn rademacher_probe(seed: u64, index: u64, n: usize) -> Vec<f64> {
    InitDistribution::Rademacher
        .sample_block(seed, index, n, 1)
        .into_data()
}
