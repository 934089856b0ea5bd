//! Reproducible random streams.
//!
//! Every Monte-Carlo task draws from a ChaCha stream keyed by the master
//! seed and selected by the task index, so results do not depend on how
//! tasks are scheduled across workers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

/// The random stream for task `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A fresh master seed for sub-task `index`, e.g. one point of a sweep.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // stream 2⁶³+index keeps these apart from the Monte-Carlo chunk streams
    stream(seed, (1 << 63) | index).next_u64()
}
