//! Counter-based random streams.
//!
//! A stream is identified by `(seed, index)`: a ChaCha8 generator keyed by
//! `seed` with its 64-bit stream id set to `index`. Stream `i` is therefore a
//! pure function of the pair and never depends on how many other streams
//! were drawn or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an independent seed from `seed` and a domain-separation tag.
pub fn derive(seed: u64, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(b"imm-core/derive/v1");
    h.update(seed.to_le_bytes());
    h.update(tag.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}
