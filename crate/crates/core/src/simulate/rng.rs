//! Per-replicate random streams.
//!
//! Every replicate draws from its own ChaCha20 stream keyed by the master
//! seed, with the replicate index as the stream id. ChaCha is a counter-based
//! generator, so replicate `r` sees the same numbers no matter which thread
//! runs it or in what order replicates are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn replicate_rng(master_seed: u64, replicate: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng
}
