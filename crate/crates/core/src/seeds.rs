//! Named seed streams.
//!
//! Every random component (scenario sampling, delays, tie-breaks, arrival
//! orders, algorithm coins) draws from its own stream derived from a single
//! master seed. The split function is
//!
//! ```text
//! derive(master, name)    = first 8 bytes (LE) of SHA-256(master_le || name)
//! derive(master, name, i) = first 8 bytes (LE) of SHA-256(master_le || name || 0x00 || i_le)
//! ```
//!
//! so a stream's values do not depend on how many draws other streams made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const SCENARIO: &str = "scenario";
pub const DELAYS: &str = "delays";
pub const TIE_BREAK: &str = "tie-break";
pub const ARRIVAL: &str = "arrival";
pub const COINS: &str = "coins";

pub fn derive(master: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(name.as_bytes());
    first_u64(&h.finalize())
}

pub fn derive_indexed(master: u64, name: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(name.as_bytes());
    h.update([0u8]);
    h.update(index.to_le_bytes());
    first_u64(&h.finalize())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for item `index` of a batch; ChaCha streams keep items independent
/// of evaluation order.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

fn first_u64(bytes: &[u8]) -> u64 {
    let mut b = [0u8; 8];
    b.copy_from_slice(&bytes[..8]);
    u64::from_le_bytes(b)
}
