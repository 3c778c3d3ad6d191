//! Named deterministic random substreams.
//!
//! Every robot and trial draws from its own `ChaCha8Rng`, seeded from the
//! SHA-256 digest of the root seed and a path-like name such as
//! `trial/3/landmark/L5`. Streams never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

pub fn substream(root: u64, name: &str) -> SimRng {
    SimRng::from_seed(substream_seed(root, name))
}

pub fn substream_seed(root: u64, name: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(name.as_bytes());
    hasher.finalize().into()
}

/// A 64-bit seed derived the same way, for handing to nested components.
pub fn derive_seed(root: u64, name: &str) -> u64 {
    let bytes = substream_seed(root, name);
    u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"))
}
