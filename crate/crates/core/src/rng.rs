//! Seed derivation for reproducible, schedule-independent training.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout the crate.
pub type ModelRng = ChaCha8Rng;

/// Stream `index` of the counter-based generator keyed by `seed`.
///
/// Streams are independent and depend only on `(seed, index)`, so work items
/// can be processed in any order or on any thread with identical results.
pub fn child_rng(seed: u64, index: u64) -> ModelRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
