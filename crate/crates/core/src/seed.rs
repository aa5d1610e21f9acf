//! Seed derivation. Every random stream in a run is keyed by the base `--seed` plus a
//! path of stream ids, e.g. `(seed, [ITERATION, i, WALKS, node, walk])`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_WALKS: u64 = 0x5741_4c4b;
pub const STREAM_TRAIN: u64 = 0x5452_4e00;
pub const STREAM_ITERATION: u64 = 0x4954_4552;
pub const STREAM_SYNTH: u64 = 0x5359_4e54;
pub const STREAM_SHUFFLE: u64 = 0x5348_5546;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(base), |acc, &id| {
        splitmix64(acc ^ splitmix64(id))
    })
}

pub fn rng_for(base: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, path))
}
