//! Per-trial random streams derived from one master seed.
//!
//! Trial `k` draws from ChaCha8 seeded with the master seed, on stream `k`.
//! Streams are independent, so trials can run in any order or in parallel
//! and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}
