//! Seeded FNV-1a coin flips.
//!
//! Every stochastic decision in the toolkit is a pure function of a seed and
//! a record id, so sharded or reordered runs make identical choices.

use alloc::string::String;
use core::fmt::Write as _;

pub const FNV_OFFSET_BASIS: u64 = 14_695_981_039_346_656_037;
pub const FNV_PRIME: u64 = 1_099_511_628_211;

/// 64-bit FNV-1a over raw bytes.
#[must_use]
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    fnv1a64_extend(FNV_OFFSET_BASIS, bytes)
}

/// Continues an FNV-1a state with more bytes, so keys can be hashed in parts
/// without concatenating them first.
#[must_use]
pub fn fnv1a64_extend(mut state: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        state ^= u64::from(b);
        state = state.wrapping_mul(FNV_PRIME);
    }
    state
}

/// Hash of `"{seed}:{salt}{key}"` with the seed written in decimal.
#[must_use]
pub fn seeded_hash(seed: u64, salt: &str, key: &str) -> u64 {
    let mut seed_buf = String::with_capacity(20);
    let _ = write!(seed_buf, "{seed}");
    let h = fnv1a64_extend(FNV_OFFSET_BASIS, seed_buf.as_bytes());
    let h = fnv1a64_extend(h, b":");
    let h = fnv1a64_extend(h, salt.as_bytes());
    fnv1a64_extend(h, key.as_bytes())
}

/// Maps a hash onto `[0, 1)` as `h / 2^64`. Lossy; use [`below`] for decisions.
#[must_use]
pub fn unit(h: u64) -> f64 {
    h as f64 / 18_446_744_073_709_551_616.0
}

/// Exact test of `h / 2^64 < p`.
///
/// `p * 2^64` is exact in binary floating point, so comparing the hash against
/// its ceiling is free of rounding for every `p`.
#[must_use]
pub fn below(h: u64, p: f64) -> bool {
    if p.is_nan() || p <= 0.0 {
        return false;
    }
    let scaled = p * 18_446_744_073_709_551_616.0;
    if scaled >= 18_446_744_073_709_551_616.0 {
        return true;
    }
    let floor = scaled as u64;
    let ceil = if (floor as f64) < scaled { floor + 1 } else { floor };
    h < ceil
}
