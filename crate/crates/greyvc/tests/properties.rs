//! Randomized property tests over the Boolean core, the permutation
//! regimes, and the quantization pipeline.

use itertools::Itertools;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use greyvc::boolmat::{BlockLayout, BoolMatrix, BoolVector};
use greyvc::pipeline::{quantize, GreyImage};

/// Two equal-length 0/1 vectors.
fn bit_pair(max_len: usize) -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    (1..=max_len).prop_flat_map(|len| {
        (
            prop::collection::vec(0u8..=1, len),
            prop::collection::vec(0u8..=1, len),
        )
    })
}

/// A 0/1 matrix together with a uniform block layout covering its columns.
fn matrix_with_layout() -> impl Strategy<Value = (Vec<Vec<u8>>, usize, usize)> {
    (1usize..=4, 1usize..=4, 1usize..=4).prop_flat_map(|(rows, count, width)| {
        (
            prop::collection::vec(prop::collection::vec(0u8..=1, count * width), rows),
            Just(count),
            Just(width),
        )
    })
}

fn matrix_of(rows: &[Vec<u8>]) -> BoolMatrix {
    let cols = rows[0].len();
    let bits: Vec<u8> = rows.iter().flatten().copied().collect();
    BoolMatrix::new(rows.len(), cols, bits).expect("generated bits are boolean")
}

proptest! {
    #[test]
    fn xor_decomposition_matches_native((a, b) in bit_pair(64)) {
        let va = BoolVector::new(a).unwrap();
        let vb = BoolVector::new(b).unwrap();
        prop_assert_eq!(va.xor_decomposed(&vb).unwrap(), va.xor(&vb).unwrap());
    }

    #[test]
    fn and_decomposition_is_conjunction((a, b) in bit_pair(64)) {
        let va = BoolVector::new(a.clone()).unwrap();
        let vb = BoolVector::new(b.clone()).unwrap();
        let expected: Vec<u8> = a.iter().zip(&b).map(|(&x, &y)| x & y).collect();
        let anded = va.and_decomposed(&vb).unwrap();
        prop_assert_eq!(anded.bits(), &expected[..]);
    }

    #[test]
    fn block_permutation_preserves_block_column_multisets(
        (rows, count, width) in matrix_with_layout(),
        seed in any::<u64>(),
    ) {
        let matrix = matrix_of(&rows);
        let layout = BlockLayout::uniform(count, width).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let permuted = matrix.wbcp_sample(&layout, &mut rng).unwrap();
        prop_assert_eq!(permuted.rows(), matrix.rows());
        prop_assert_eq!(permuted.cols(), matrix.cols());
        for range in layout.ranges() {
            let mut cols_before: Vec<Vec<u8>> =
                range.clone().map(|j| matrix.col(j).bits().to_vec()).collect();
            let mut cols_after: Vec<Vec<u8>> =
                range.map(|j| permuted.col(j).bits().to_vec()).collect();
            cols_before.sort();
            cols_after.sort();
            prop_assert_eq!(cols_before, cols_after);
        }
    }

    #[test]
    fn locked_permutation_uses_one_draw_for_every_block(
        (rows, count, width) in matrix_with_layout(),
        seed in any::<u64>(),
    ) {
        let matrix = matrix_of(&rows);
        let layout = BlockLayout::uniform(count, width).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let permuted = matrix.wbcp_sample_locked(&layout, &mut rng).unwrap();
        // Some single width-wide permutation, repeated across all blocks,
        // must explain the whole draw.
        let found = (0..width).permutations(width).any(|perm| {
            let draws = vec![perm; count];
            matrix.wbcp_permute(&layout, &draws).unwrap() == permuted
        });
        prop_assert!(found);
    }

    #[test]
    fn gamma_shift_preserves_weight_and_cycles(
        count in 1usize..=4,
        width in 1usize..=6,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..count * width).map(|_| rand::Rng::gen_range(&mut rng, 0..=1)).collect();
        let v = BoolVector::new(bits).unwrap();
        let shifted = v.gamma_shift(width).unwrap();
        prop_assert_eq!(shifted.hamming(), v.hamming());
        let mut cycled = v.clone();
        for _ in 0..width {
            cycled = cycled.gamma_shift(width).unwrap();
        }
        prop_assert_eq!(cycled, v);
    }

    #[test]
    fn render_then_quantize_is_identity_for_small_g(
        g in 2usize..=16,
        raw in prop::collection::vec(0usize..16, 1..=64),
    ) {
        let levels: Vec<u8> = raw.iter().map(|&q| (q % g) as u8).collect();
        let img = GreyImage::new(levels.len(), 1, g, levels.clone()).unwrap();
        let back = quantize(levels.len(), 1, &img.render(), g).unwrap();
        prop_assert_eq!(back.levels(), &levels[..]);
    }
}
