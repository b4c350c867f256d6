//! Counter-based random streams keyed by `(master seed, replica, label)`.
//!
//! Every stream is a ChaCha keystream: the key is the SHA-256 of the master
//! seed and the label, the replica index selects the ChaCha stream. Streams
//! are therefore independent of scheduling and of each other.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub master: u64,
    pub replica: u64,
    pub label: String,
}

impl RngSeed {
    pub fn new(master: u64, replica: u64, label: impl Into<String>) -> Self {
        Self {
            master,
            replica,
            label: label.into(),
        }
    }

    /// Same master and replica, with `/suffix` appended to the label.
    pub fn child(&self, suffix: &str) -> Self {
        Self {
            master: self.master,
            replica: self.replica,
            label: format!("{}/{}", self.label, suffix),
        }
    }

    pub fn with_replica(&self, replica: u64) -> Self {
        Self {
            master: self.master,
            replica,
            label: self.label.clone(),
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.master.to_le_bytes());
        h.update((self.label.len() as u64).to_le_bytes());
        h.update(self.label.as_bytes());
        h.finalize().into()
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::from_seed(self.key());
        rng.set_stream(self.replica);
        rng
    }

    /// A 64-bit digest of the whole triple, used to key hash-derived uniforms.
    pub fn digest(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(self.key());
        h.update(self.replica.to_le_bytes());
        let out = h.finalize();
        u64::from_le_bytes(out[..8].try_into().unwrap())
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform in `[0, 1)` from the top 53 bits.
pub fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Deterministic uniform attached to a point: hashes the coordinate bits with `key`.
pub fn point_uniform(key: u64, coords: &[f64]) -> f64 {
    let mut z = mix64(key);
    for c in coords {
        z = mix64(z ^ c.to_bits());
    }
    unit_from_bits(z)
}

/// Standard normal drawn at a fixed position of the keystream, so the value
/// depends only on `(stream, index)` and not on what else was drawn.
pub fn normal_at(rng: &mut ChaCha12Rng, index: u64) -> f64 {
    rng.set_word_pos(index as u128 * 4);
    let u1 = 1.0 - unit_from_bits(rng.gen::<u64>());
    let u2 = unit_from_bits(rng.gen::<u64>());
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
