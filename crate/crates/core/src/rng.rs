//! Seeded random streams.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A stream is
//! identified by `(seed, stream_id)`: the key is derived from `seed` with
//! `SeedableRng::seed_from_u64` and `stream_id` selects the ChaCha stream
//! (nonce). Distinct stream ids give independent sequences for the same
//! seed, which is how training, evaluation and per-episode draws stay
//! isolated from each other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream used by a trainer for exploration, environment and replay draws.
pub const TRAINING_STREAM: u64 = 0;
/// Stream used for network initialisation.
pub const INIT_STREAM: u64 = 1;
/// Evaluation episodes use `EVALUATION_STREAM_BASE + episode_seed`.
pub const EVALUATION_STREAM_BASE: u64 = 1 << 32;

pub fn stream(seed: u64, stream_id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
