//! Seed derivation for experiment cells and runs.
//!
//! Every run owns a [`RunRng`] built from a 64-bit run seed. Run seeds are
//! derived from the experiment's base seed, the cell index and the run index
//! with the SplitMix64 finalizer, so any single run can be replayed on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every random draw in the pipeline.
pub type RunRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed used by the command line when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;

/// SplitMix64 output function: one increment by the golden gamma followed by
/// the variant-13 avalanche mix.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(splitmix64(base) ^ cell) ^ run)`.
pub fn derive_run_seed(base_seed: u64, cell_index: u64, run_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ cell_index) ^ run_index)
}

/// Independent sub-stream of a run seed, e.g. for control-corpus generation.
pub fn substream(run_seed: u64, tag: u64) -> u64 {
    splitmix64(run_seed ^ splitmix64(tag))
}

pub fn rng_from_seed(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}
