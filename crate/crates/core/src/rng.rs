//! Counter-based random streams.
//!
//! Every draw is a pure function of a [`StreamKey`]: the seed selects the
//! ChaCha key, the trial index selects the stream and the slot selects the
//! block position inside that stream. Concurrent trials therefore need no
//! coordination and results do not depend on scheduling.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::f64::consts::TAU;

/// Address of one draw: `(seed, trial, slot)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub trial: u64,
    pub slot: u64,
}

impl StreamKey {
    pub fn new(seed: u64, trial: u64, slot: u64) -> Self {
        Self { seed, trial, slot }
    }
}

// Each slot owns 128 bits of the stream (four 32-bit words).
const WORDS_PER_SLOT: u128 = 4;

fn raw_pair(key: StreamKey) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(key.seed);
    rng.set_stream(key.trial);
    rng.set_word_pos(key.slot as u128 * WORDS_PER_SLOT);
    (rng.next_u64(), rng.next_u64())
}

/// Maps 64 random bits to a double in `(0, 1]`.
fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw on `(0, 1]`.
pub fn uniform(key: StreamKey) -> f64 {
    open_unit(raw_pair(key).0)
}

/// Uniform draw on `[lo, hi]`.
pub fn uniform_in(key: StreamKey, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform(key)
}

/// Standard normal draw by the Box–Muller transform (cosine branch).
pub fn standard_normal(key: StreamKey) -> f64 {
    let (a, b) = raw_pair(key);
    let u1 = open_unit(a);
    let u2 = open_unit(b);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Draw from `N(mu, sigma^2)`. `sigma == 0` returns `mu` exactly.
pub fn normal(key: StreamKey, mu: f64, sigma: f64) -> f64 {
    debug_assert!(sigma >= 0.0, "negative standard deviation");
    if sigma == 0.0 {
        return mu;
    }
    mu + sigma * standard_normal(key)
}
