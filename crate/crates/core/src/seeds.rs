//! Seed lists and the random streams derived from them.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded through
//! `SeedableRng::seed_from_u64`, so outputs are reproducible across platforms
//! and independent of thread scheduling. Trial seeds are derived from a master
//! seed with the SplitMix64 finalizer:
//!
//! ```text
//! s_i = mix(master + (i + 1) * 0x9E3779B97F4A7C15)      (wrapping arithmetic)
//! mix(z) = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!          z ^= z >> 27; z *= 0x94D049BB133111EB; z ^ (z >> 31)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `i`-th trial seed derived from `master`.
pub fn derive_seed(master: u64, i: u64) -> u64 {
    mix(master.wrapping_add(i.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Non-empty ordered list of trial seeds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedList(Vec<u64>);

impl SeedList {
    pub fn new(seeds: Vec<u64>) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::Config("seed list must be non-empty".into()));
        }
        Ok(SeedList(seeds))
    }

    /// `m` seeds expanded from `master`.
    pub fn from_master(master: u64, m: usize) -> Result<Self> {
        Self::new((0..m as u64).map(|i| derive_seed(master, i)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}
