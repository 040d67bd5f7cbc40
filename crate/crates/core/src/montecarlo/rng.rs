use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent random stream for frame `frame` of sweep point `point`.
///
/// The key is a pure function of its arguments, so a frame sees the same
/// numbers no matter which worker runs it or in what order.
pub fn substream(seed: u64, point: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(mix(seed) ^ point));
    rng.set_stream(frame);
    rng
}

/// Point index reserved for energy calibration frames.
pub const CALIBRATION_POINT: u64 = u64::MAX;
