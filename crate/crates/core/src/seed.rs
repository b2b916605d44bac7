//! Deterministic seed derivation.
//!
//! Channel seeds are derived from a master seed with one SplitMix64 step
//! over `master ^ (channel_index + 1) * 0x9E37_79B9_7F4A_7C15`. The mapping
//! is part of the stable interface: changing it changes every output file.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for channel `index` of a stream driven by `master`.
pub fn channel_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Seed for an arbitrary named sub-stream (e.g. "noise", "ir.near.0.1").
pub fn derive_seed(master: u64, label: &str) -> u64 {
    label
        .bytes()
        .fold(splitmix64(master), |acc, b| splitmix64(acc ^ b as u64))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_seeds_are_stable_and_distinct() {
        assert_eq!(channel_seed(1, 0), channel_seed(1, 0));
        assert_ne!(channel_seed(1, 0), channel_seed(1, 1));
        assert_ne!(channel_seed(1, 0), channel_seed(2, 0));
        // Frozen so that accidental changes to the fan-out are caught.
        assert_eq!(channel_seed(0, 0), splitmix64(0x9E37_79B9_7F4A_7C15));
    }

    #[test]
    fn labels_separate_streams() {
        assert_ne!(derive_seed(7, "noise"), derive_seed(7, "ir"));
        assert_eq!(derive_seed(7, "noise"), derive_seed(7, "noise"));
    }
}
