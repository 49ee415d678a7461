//! Counter-based randomness: every value is a function of (seed, stream, index).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream reserved for the tie-breaking coin of [`sign_quantize`](super::sign_quantize).
pub const TIE_STREAM: u64 = u64::MAX;
/// Stream reserved for the level-memory base vector.
pub const LEVEL_BASE_STREAM: u64 = u64::MAX - 1;
/// Stream reserved for the level-memory flip order.
pub const LEVEL_ORDER_STREAM: u64 = u64::MAX - 2;

/// A ChaCha8 generator positioned at the start of `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a parent seed and a tag.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_add(0x5851_F42D_4C95_7F2D)))
}
