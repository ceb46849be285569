//! Named, reproducible random streams derived from one root seed.
//!
//! Every random component of an experiment (resampling instance, config
//! sampling, candidate shuffling, ...) draws from its own stream so that one
//! part can be replayed without consuming numbers from another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a root seed, a stream label and an index into a child seed.
pub fn derive_seed(root: u64, label: &str, index: u64) -> u64 {
    let mut h = FNV_OFFSET;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(splitmix64(root ^ h).wrapping_add(index))
}

pub fn stream(root: u64, label: &str, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(root, label, index))
}
