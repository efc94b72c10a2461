//! Seeded randomness shared by the k-means seeding and the random segment-count sweep.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`. Uniform reals are `(next_u64() >> 11) * 2^-53`, so a
//! sequence can be reproduced by any ChaCha8 implementation that uses the
//! same seed expansion.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in `[0, 1)`.
#[inline]
pub fn unit_f64(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..n`.
#[inline]
pub fn index(rng: &mut Rng, n: usize) -> usize {
    ((unit_f64(rng) * n as f64) as usize).min(n - 1)
}
