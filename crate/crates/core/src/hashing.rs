//! Stable 64-bit FNV-1a hashing.
//!
//! Every hashed feature space in the crate (classifier buckets, embedding
//! buckets, client sharding) goes through this function so results do not
//! depend on the standard library's hasher seed or version.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |hash, &b| {
        (hash ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Hex digest of a weight vector, used in training traces.
pub fn hash_weights(weights: &[f64]) -> String {
    let mut hash = FNV_OFFSET;
    for w in weights {
        for b in w.to_bits().to_le_bytes() {
            hash = (hash ^ u64::from(b)).wrapping_mul(FNV_PRIME);
        }
    }
    format!("{hash:016x}")
}
