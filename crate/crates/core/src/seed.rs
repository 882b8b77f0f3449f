//! Seed derivation.
//!
//! A single user seed is fanned out to per-component generators by hashing the
//! component name, so any stage can be rerun in isolation with the same
//! randomness it saw inside the full pipeline.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the sub-seed for `component` from a root seed.
pub fn derive(seed: u64, component: &str) -> u64 {
    splitmix64(seed ^ fnv1a(component.as_bytes()))
}

/// Portable deterministic generator used everywhere in the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform double in `[0, 1)` built from the top 53 bits of a `u64`.
pub(crate) fn unit_f64(rng: &mut impl rand::RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_get_distinct_seeds() {
        assert_ne!(derive(1, "encoder"), derive(1, "kmeans"));
        assert_ne!(derive(1, "encoder"), derive(2, "encoder"));
        assert_eq!(derive(9, "balance"), derive(9, "balance"));
    }

    #[test]
    fn unit_interval() {
        let mut r = rng(3);
        for _ in 0..1000 {
            let u = unit_f64(&mut r);
            assert!((0.0..1.0).contains(&u));
        }
    }
}
