//! Deterministic RNG substreams.
//!
//! Every consumer gets its own ChaCha8 stream keyed by
//! `(master_seed, domain, class, ordinal)`, so generation order and
//! thread count never change the output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains. New domains get new constants; values are part of the
/// on-disk reproducibility contract and must never be reused.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum StreamKind {
    Sample = 0x01,
    Split = 0x02,
    WeightInit = 0x03,
    Mask = 0x04,
    Shuffle = 0x05,
}

/// Build the substream for `(seed, kind, class, ordinal)`.
pub fn substream(master_seed: u64, kind: StreamKind, class: u64, ordinal: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&(kind as u64).to_le_bytes());
    key[16..24].copy_from_slice(&class.to_le_bytes());
    key[24..32].copy_from_slice(&ordinal.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
