//! Seed derivation shared by every stage.

use sha2::{Digest, Sha256};

/// Derives an independent 64-bit seed for `stage` from a global seed.
///
/// Each stage gets its own stream so rerunning one stage in isolation
/// reproduces exactly what a full pipeline run would have produced.
pub fn derive_seed(global: u64, stage: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(stage.as_bytes());
    hasher.update(b"\0");
    hasher.update(global.to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Lowercase hex SHA-256 of `data`, truncated to `len` characters.
pub fn short_hash(data: &[u8], len: usize) -> String {
    let digest = Sha256::digest(data);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        out.push_str(&format!("{b:02x}"));
    }
    out.truncate(len);
    out
}
