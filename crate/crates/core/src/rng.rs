//! Seeded, splittable random streams.
//!
//! Every stochastic routine splits its work into fixed-size shards and gives
//! shard `i` the ChaCha stream `i` of the user seed. Results therefore depend
//! only on the seed and the shard layout, never on how many threads ran.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of samples drawn from one stream before moving to the next.
pub const SHARD_SIZE: usize = 1 << 14;

/// The RNG for shard `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Split `count` items into `(shard_index, len)` pieces of at most [`SHARD_SIZE`].
pub fn shards(count: usize) -> Vec<(u64, usize)> {
    (0..count.div_ceil(SHARD_SIZE))
        .map(|i| (i as u64, SHARD_SIZE.min(count - i * SHARD_SIZE)))
        .collect()
}
