//! Seed derivation and RNG construction.
//!
//! All randomized operations in this crate are driven by ChaCha12 streams.
//! A single user-facing `u64` seed is fanned out with [`derive`] into
//! per-stage / per-element seeds, and each voter gets its own ChaCha stream
//! (`set_stream`) so that generating voter `i` never consumes randomness that
//! belongs to voter `j`. Outputs are therefore independent of evaluation
//! order and worker counts.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// splitmix64 finalizer; the standard 64-bit avalanche mix.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `(seed, salt)`.
///
/// Distinct salts give (for all practical purposes) uncorrelated child seeds,
/// so callers can carve one user seed into stable per-purpose channels.
pub fn derive(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt.wrapping_add(0xa076_1d64_78bd_642f)))
}

/// RNG for election-level draws (candidate positions, axes, tree layouts).
/// Uses stream 0; voters use streams 1..=n.
pub fn election_rng(seed: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// RNG owned by a single voter. Voter `i` gets stream `i + 1`.
pub fn voter_rng(seed: u64, voter: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(voter as u64 + 1);
    rng
}
