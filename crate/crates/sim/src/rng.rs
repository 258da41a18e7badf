//! Named random streams derived from a single scenario seed.
//!
//! Each module draws only from its own stream, so adding draws in one
//! module never perturbs the sequences seen by another. Streams are
//! ChaCha8 generators keyed by (seed, stream index) through a SplitMix64
//! expansion.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The independent streams owned by one simulation instance.
pub struct RngStreams {
    pub channel: ChaCha8Rng,
    pub mobility: ChaCha8Rng,
    pub traffic: ChaCha8Rng,
    pub phy: ChaCha8Rng,
}

impl RngStreams {
    pub fn from_seed(seed: u64) -> Self {
        RngStreams {
            channel: stream_rng(seed, 0),
            mobility: stream_rng(seed, 1),
            traffic: stream_rng(seed, 2),
            phy: stream_rng(seed, 3),
        }
    }
}

/// Build one stream generator for (seed, stream index).
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut state = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Zero-mean Gaussian draw via the Box-Muller transform.
pub fn sample_gaussian<R: Rng>(rng: &mut R, mean: f64, std_dev: f64) -> f64 {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let u1 = if u1 == 0.0 { f64::MIN_POSITIVE } else { u1 };
    let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    mean + std_dev * z
}
