//! Counter-based seeding.
//!
//! Every replication owns a generator whose seed is a pure function of
//! `(master, stream, index)`, so any single replication can be re-run in
//! isolation and results do not depend on scheduling or worker count.
//!
//! The mixing function is the SplitMix64 finalizer applied in a chain:
//! `seed = fmix(fmix(fmix(master) ^ stream * K1) ^ index * K2)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const K_STREAM: u64 = 0xD1B5_4A32_D192_ED03;
const K_INDEX: u64 = 0x8CB9_2BA7_2F3D_8DD7;

#[inline]
fn fmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of replication `index` in sub-stream `stream`.
pub fn mix_seed(master: u64, stream: u64, index: u64) -> u64 {
    let a = fmix(master);
    let b = fmix(a ^ stream.wrapping_mul(K_STREAM));
    fmix(b ^ index.wrapping_mul(K_INDEX))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Sub-streams used when one model seed has to feed several generators.
pub(crate) mod stream {
    pub const PROCESS: u64 = 1;
    pub const MASK: u64 = 2;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn mixing_is_a_pure_function() {
        assert_eq!(mix_seed(42, 3, 7), mix_seed(42, 3, 7));
        assert_ne!(mix_seed(42, 3, 7), mix_seed(42, 3, 8));
        assert_ne!(mix_seed(42, 3, 7), mix_seed(42, 4, 7));
        assert_ne!(mix_seed(42, 3, 7), mix_seed(43, 3, 7));
    }

    #[test]
    fn neighbouring_indices_give_unrelated_streams() {
        let a: u64 = rng_from_seed(mix_seed(1, 0, 0)).random();
        let b: u64 = rng_from_seed(mix_seed(1, 0, 1)).random();
        assert_ne!(a, b);
        // no low-bit collisions across the first thousand indices
        let mut seen = std::collections::HashSet::new();
        for i in 0..1000 {
            assert!(seen.insert(mix_seed(9, 0, i) & 0xFFFF_FFFF));
        }
    }
}
