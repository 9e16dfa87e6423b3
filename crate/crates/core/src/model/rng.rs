//! Counter-based randomness.
//!
//! Every random number in a realization is a pure function of
//! `(base_seed, realization_index, purpose, i, j)`. Nothing depends on the
//! order in which pairs are visited or on how work is split across threads,
//! so a grid-accelerated generator and a brute-force one see the same draws.

use serde::{Deserialize, Serialize};

/// Identifies one realization of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub realization_index: u64,
}

impl SeedSpec {
    pub const fn new(base_seed: u64, realization_index: u64) -> Self {
        Self {
            base_seed,
            realization_index,
        }
    }

    pub fn uniform(&self, purpose: Purpose, i: u64, j: u64) -> f64 {
        to_unit(self.hash(purpose, i, j))
    }

    pub fn hash(&self, purpose: Purpose, i: u64, j: u64) -> u64 {
        keyed_hash(&[self.base_seed, self.realization_index, purpose as u64, i, j])
    }
}

/// Tags separating the independent random streams of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    NodeRadius = 0x5241_4449_5553,
    NodeAngle = 0x414e_474c_45,
    FiberLink = 0x4649_4245_52,
    PhotonicLink = 0x5048_4f54_4f4e,
    PathSources = 0x5041_5448,
    Bootstrap = 0x424f_4f54,
}

/// Derives the base seed of a sub-run (e.g. one sweep grid point).
pub fn derive_seed(base_seed: u64, stream: u64, index: u64) -> u64 {
    keyed_hash(&[base_seed, stream, index])
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sponge-style absorption of the key words through the SplitMix64 finalizer.
#[inline]
pub fn keyed_hash(words: &[u64]) -> u64 {
    let mut state = 0x6a09_e667_f3bc_c909_u64;
    for &w in words {
        state = splitmix64(state ^ w);
    }
    splitmix64(state)
}

/// Top 53 bits as a uniform double in [0, 1).
#[inline]
pub fn to_unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
