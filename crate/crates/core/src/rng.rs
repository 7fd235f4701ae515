//! Seed derivation for independent, reproducible trajectory streams.
//!
//! Every trajectory owns a ChaCha8 stream keyed by a 64-bit seed derived
//! from `(master, instance, trajectory)`. Derived seeds do not depend on how
//! work is split across threads, and adding instances never shifts the
//! streams of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrajectoryRng = ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trajectory `trajectory` of instance `instance` under `master`.
pub fn derive_seed(master: u64, instance: u64, trajectory: u64) -> u64 {
    mix64(mix64(mix64(master) ^ instance) ^ trajectory.rotate_left(17))
}

/// Seed for the noise stream that accompanies a trajectory seed.
pub fn noise_seed(trajectory_seed: u64, noise_master: u64) -> u64 {
    mix64(trajectory_seed ^ mix64(noise_master ^ 0xA5A5_5A5A_C3C3_3C3C))
}

pub fn stream(seed: u64) -> TrajectoryRng {
    ChaCha8Rng::seed_from_u64(seed)
}
