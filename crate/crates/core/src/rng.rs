//! Counter-derived random streams.
//!
//! Every random consumer gets a ChaCha8 stream keyed by `(seed, counter,
//! domain)`, so results never depend on thread count or completion order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PERMUTATION_DOMAIN: [u8; 16] = *b"mps/permutation\0";
const SCENARIO_DOMAIN: [u8; 16] = *b"mps/scenario\0\0\0\0";

fn keyed(seed: u64, counter: u64, domain: [u8; 16]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&counter.to_le_bytes());
    key[16..].copy_from_slice(&domain);
    ChaCha8Rng::from_seed(key)
}

/// Stream for permutation round `round` of exclusion iteration `iteration`.
pub fn round_rng(master_seed: u64, iteration: u64, round: u64) -> ChaCha8Rng {
    let mut rng = keyed(master_seed, iteration, PERMUTATION_DOMAIN);
    rng.set_stream(round);
    rng
}

/// Stream used to draw a synthetic scenario's distances.
pub fn scenario_rng(seed: u64) -> ChaCha8Rng {
    keyed(seed, 0, SCENARIO_DOMAIN)
}

/// Seed for trial `trial` of a Monte Carlo campaign (SplitMix64 finalizer).
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    let mut z = master_seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
