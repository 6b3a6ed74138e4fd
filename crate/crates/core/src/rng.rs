//! Counter-based random streams keyed by `(seed, stream_id)`.
//!
//! Each pixel, sample or chain owns a stream id, so results do not depend on
//! how work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Uniform draw in `[0, 1)`.
pub fn unit(rng: &mut StreamRng) -> f64 {
    rng.gen::<f64>()
}
