//! Seed derivation for named random substreams.
//!
//! Every run owns a single master seed. Each component (sampling, search,
//! bootstrap, noise) derives its own ChaCha stream from the master seed and a
//! string label, so adding draws to one component never perturbs another.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a 32-byte substream seed from a master seed and a label.
pub fn derive_seed(master: u64, label: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update([0x1f]);
    hasher.update(label.as_bytes());
    hasher.finalize().into()
}

/// A seeded ChaCha stream for the given substream label.
pub fn substream(master: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_seed(master, label))
}

/// A substream further keyed by an index (per-task fits, per-round samples).
pub fn indexed_substream(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(derive_seed(master, label));
    hasher.update(index.to_le_bytes());
    let seed: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(seed)
}

/// Deterministic noise stream keyed by (seed, coefficient vector), so the
/// same merged model always observes the same noise draw.
pub fn coefficient_keyed_stream(seed: u64, coefficients: &[f64]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for &value in coefficients {
        hasher.update(value.to_bits().to_le_bytes());
    }
    let seed: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(seed)
}
