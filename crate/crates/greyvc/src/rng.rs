//! Deterministic seeded randomness.
//!
//! One 64-bit master seed; every pixel gets its own ChaCha8 stream keyed by
//! (seed, row, column, domain tag), so encoding is reproducible bit-for-bit
//! no matter how pixels are scheduled across threads.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random stream for one pixel of one image encode.
pub fn pixel_stream(seed: u64, row: u64, col: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&row.to_le_bytes());
    key[16..24].copy_from_slice(&col.to_le_bytes());
    key[24..32].copy_from_slice(b"px-perm\0");
    ChaCha8Rng::from_seed(key)
}

/// Uniform random permutation of 0..width (Fisher-Yates).
pub fn sample_permutation<R: Rng + ?Sized>(rng: &mut R, width: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..width).collect();
    perm.shuffle(rng);
    perm
}
