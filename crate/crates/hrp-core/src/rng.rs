//! Deterministic RNG stream derivation.
//!
//! Every random draw in a run is tied to the scenario seed through a named
//! substream, so links can be evaluated in any order (or in parallel) without
//! changing the result.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag for UE placement and BS seeding.
pub const STREAM_SCENARIO: u64 = 0x5343_454e;
/// Stream tag for per-link terrestrial channel draws.
pub const STREAM_CHANNEL: u64 = 0x4348_414e;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes a seed with a list of tags into a single substream seed.
pub fn mix(seed: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(seed);
    for &t in tags {
        state = splitmix64(state ^ t);
    }
    state
}

/// Deterministic substream for `(seed, tags)`.
pub fn substream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, tags))
}

/// Per-link substream, keyed by `(seed, ue_index, bs_index)`.
pub fn link_stream(seed: u64, ue: usize, bs: usize) -> ChaCha8Rng {
    substream(seed, &[STREAM_CHANNEL, ue as u64, bs as u64])
}
