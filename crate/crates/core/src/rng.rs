//! Counter-style seeded random streams.
//!
//! Every random quantity in the pipeline is drawn from a ChaCha stream keyed by
//! `(seed, stage, index)`, so any item can be regenerated independently of
//! processing order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stage tags separating the uses of one seed.
pub mod stage {
    pub const SCRAMBLE: u64 = 1;
    pub const ADDRESS: u64 = 2;
    pub const SYNTHESIS: u64 = 3;
    pub const COPIES: u64 = 4;
    pub const SEQUENCING: u64 = 5;
    pub const PEG: u64 = 6;
    pub const INPUT: u64 = 7;
    pub const READ_PICK: u64 = 8;
}

pub fn stream(seed: u64, stage: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stage.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
