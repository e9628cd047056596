//! Random stream derivation.
//!
//! Every stochastic operation takes a plain `u64` seed. Monte Carlo drivers
//! derive one seed per (trial, stage) from a master seed with [`stream_seed`],
//! so a trial's random numbers never depend on which thread ran it or in
//! which order trials were scheduled.

use rand::SeedableRng;
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Stage tags mixed into derived seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Load = 1,
    Assemble = 2,
    Address = 3,
    Execute = 4,
    Noise = 5,
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream for `index` (usually a trial or cycle number) within
/// `stage`, derived from `master`.
///
/// The rule is `splitmix64(splitmix64(master ^ stage) ^ index)`.
pub fn stream_seed(master: u64, stage: Stage, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ (stage as u64).wrapping_mul(0xA076_1D64_78BD_642F)) ^ index)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs `trials` independent trials on the rayon pool. Trial `t` receives
/// its index; results come back in index order whatever the thread count.
pub fn par_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(f).collect()
}
