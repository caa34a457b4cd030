//! Seed plumbing.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`), keyed
//! by `ChaCha8Rng::seed_from_u64(experiment_seed)` and separated by the
//! ChaCha stream word. The stream offsets below are fixed; changing one
//! changes every downstream number.
//!
//! | stream | consumer                                          |
//! |--------|---------------------------------------------------|
//! | 0      | item-memory banks and rule-90 seed vectors        |
//! | 1      | bundling tie-break hypervector                    |
//! | 2      | synthetic class templates                         |
//! | 3      | synthetic rows (sign noise and magnitudes)        |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    ItemMemory = 0,
    TieBreak = 1,
    SynthTemplates = 2,
    SynthRows = 3,
}

pub fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for one point of a sweep: `mix64(seed ^ mix64(key))`.
pub fn derive(seed: u64, key: u64) -> u64 {
    mix64(seed ^ mix64(key))
}
