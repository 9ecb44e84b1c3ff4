//! Seeded randomness helpers.
//!
//! Every randomized operation in the crate draws from a [`ChaCha8Rng`] seeded
//! from a `u64`, so results are reproducible across platforms and runs. Stage
//! seeds are derived from one top-level seed by fixed offsets.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Fixed offsets fanning one top-level seed out to pipeline stages.
pub mod offsets {
    pub const SPLIT: u64 = 1;
    pub const FOLDS: u64 = 2;
    pub const EMBEDDING: u64 = 3;
    pub const REDUCER: u64 = 4;
    pub const CLASSIFIER: u64 = 5;
    pub const SUBSAMPLE: u64 = 6;
}

/// Derive a stage seed from the top-level seed.
pub fn stage_seed(top: u64, offset: u64) -> u64 {
    top.wrapping_add(offset)
}

/// A fresh deterministic RNG for the given seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal draw via Box-Muller.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // u1 in (0,1] so the log is finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Fisher-Yates shuffle driven by the supplied RNG.
pub fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}
