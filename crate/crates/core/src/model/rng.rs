use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::linalg::fnv1a;

pub type StreamRng = ChaCha12Rng;

/// Identifies one independent random stream: `(master seed, replicate, purpose)`.
///
/// The ChaCha key is the concatenation
/// `master ‖ replicate ‖ fnv1a(purpose) ‖ "splitmsp"` (little-endian words),
/// so distinct `(replicate, purpose)` pairs map to distinct keys for a fixed
/// master seed and draws never depend on evaluation order or worker count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    master: u64,
    replicate: u64,
    purpose: u64,
}

const DOMAIN: [u8; 8] = *b"splitmsp";

pub fn derive_stream(master: u64, replicate: u64, purpose: &str) -> RngStream {
    RngStream {
        master,
        replicate,
        purpose: fnv1a(purpose.as_bytes()),
    }
}

impl RngStream {
    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    /// The 32-byte generator key.
    pub fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master.to_le_bytes());
        key[8..16].copy_from_slice(&self.replicate.to_le_bytes());
        key[16..24].copy_from_slice(&self.purpose.to_le_bytes());
        key[24..].copy_from_slice(&DOMAIN);
        key
    }

    pub fn rng(&self) -> StreamRng {
        ChaCha12Rng::from_seed(self.key())
    }

    /// `count` independent standard normal draws from a fresh generator.
    pub fn standard_normals(&self, count: usize) -> Vec<f64> {
        let mut rng = self.rng();
        (0..count).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    }
}
