//! Hashing helpers.
//!
//! The sketch itself only consumes 64-bit hashes. The bundled mixer exists so
//! the CLI and tests can turn arbitrary tokens into well-distributed hashes
//! without extra dependencies; it is not meant to resist adversarial input.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps tokens to 64-bit hashes for [`Sketch::insert`](super::Sketch::insert).
pub trait TokenHasher {
    fn hash_bytes(&self, bytes: &[u8]) -> u64;

    fn hash_u64(&self, value: u64) -> u64 {
        self.hash_bytes(&value.to_le_bytes())
    }
}

/// Reference hasher built from the splitmix64 finalizer, applied per 8-byte
/// little-endian word. The output is stable across platforms and releases, so
/// sketches written by different builds stay mergeable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SplitMixHasher {
    seed: u64,
}

impl SplitMixHasher {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed }
    }
}

impl TokenHasher for SplitMixHasher {
    fn hash_bytes(&self, bytes: &[u8]) -> u64 {
        let mut h = mix64(self.seed ^ (bytes.len() as u64).wrapping_mul(GOLDEN_GAMMA));
        for chunk in bytes.chunks(8) {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            h = mix64(h.wrapping_add(GOLDEN_GAMMA) ^ u64::from_le_bytes(word));
        }
        h
    }
}
