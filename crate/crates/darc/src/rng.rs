//! Seed derivation. Every random draw in the crate flows from one root seed
//! split deterministically by label, so a whole run reproduces from a single
//! number.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a child seed from a root seed and a label.
///
/// Stable across platforms and releases: the child is the first eight bytes
/// of SHA-256 over the little-endian root followed by the label bytes.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// A seeded generator for the given module label.
pub fn rng_from(root: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, label))
}
