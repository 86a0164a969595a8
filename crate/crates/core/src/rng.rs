//! Seeded random streams.
//!
//! Every stochastic component draws from a ChaCha8 stream addressed by a
//! `(master_seed, stream_id)` pair. ChaCha output is specified bit-for-bit,
//! so sequences agree across platforms and runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded_rng(master_seed: u64, stream_id: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}
