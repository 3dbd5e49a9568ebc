//! Deterministic seed derivation.
//!
//! Every stage draws its randomness from `derive(global, stage, index)`:
//!
//! ```text
//! derive(g, s, i) = splitmix64(splitmix64(g) ^ ((s << 32) | i))
//! ```
//!
//! with `s` the stage code below and `i` a per-stage counter (fold id,
//! replication number, sweep grid index, ...). A stage can therefore be
//! rerun in isolation from the global seed alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StageRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    Graph = 1,
    Simulate = 2,
    Folds = 3,
    Train = 4,
    Exogeneity = 5,
    Diagnose = 6,
    Sample = 7,
    Init = 8,
    Pretrain = 9,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(global: u64, stage: Stage, index: u64) -> u64 {
    splitmix64(splitmix64(global) ^ (((stage as u64) << 32) | (index & 0xFFFF_FFFF)))
}

pub fn rng(seed: u64) -> StageRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stage_rng(global: u64, stage: Stage, index: u64) -> StageRng {
    rng(derive(global, stage, index))
}
