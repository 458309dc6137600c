//! Reproducible randomness.
//!
//! Every stochastic step in the crate draws from xoshiro256** seeded through
//! SplitMix64, so identical seeds reproduce identical sequences on every
//! platform. Independent streams are derived in two documented ways:
//!
//! * [`SeedRng::from_parts`] hashes `(seed, tag words...)` through SplitMix64
//!   to give each (rotation, grid point, class, ...) its own stream;
//! * [`split_for_class`] applies the generator's jump function `c + 1` times
//!   to place class `c` 2^128 steps apart from its siblings.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;

/// The crate-wide pseudorandom generator (xoshiro256**).
pub type SeedRng = Xoshiro256StarStar;

const SPLITMIX_GAMMA: u64 = 0x9e3779b97f4a7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(SPLITMIX_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Folds a base seed and a list of tag words into a single derived seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = base;
    let mut out = splitmix64(&mut state);
    for &p in parts {
        state ^= p.wrapping_mul(SPLITMIX_GAMMA);
        out ^= splitmix64(&mut state).rotate_left(17);
    }
    out
}

/// Helper extension for building streams from a seed plus tag words.
pub trait RngStream {
    fn from_parts(base: u64, parts: &[u64]) -> Self;
}

impl RngStream for SeedRng {
    fn from_parts(base: u64, parts: &[u64]) -> Self {
        SeedRng::seed_from_u64(derive_seed(base, parts))
    }
}

/// Stream for class `c`, split off `parent` by `c + 1` jumps (each jump
/// advances 2^128 steps, so streams never overlap).
pub fn split_for_class(parent: &SeedRng, class: usize) -> SeedRng {
    let mut rng = parent.clone();
    for _ in 0..=class {
        rng.jump();
    }
    rng
}
