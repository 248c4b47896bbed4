//! Seeded random streams.
//!
//! Every simulated path draws from its own ChaCha8 stream: the generator is
//! keyed by the run seed and the stream number is the path index. A path's
//! normals therefore do not depend on how many other paths are generated or
//! on which thread generates them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` of run `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
