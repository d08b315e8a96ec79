use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rerf_core::entropy::{
    amplitude_bits, amplitude_value, decode_coefficients, decode_motion, dpcm_decode, dpcm_encode,
    encode_coefficients, encode_motion, huffman_build, huffman_decode, huffman_encode, rle_decode,
    rle_encode, size_category, RleSymbol, ZigzagCube, AC_LEN, MAX_CODE_LEN,
};
use rerf_core::transform::CUBE_LEN;
use rerf_core::{Dims, MotionGrid};

/// Sparse block resembling quantized AC levels: mostly zeros, small
/// magnitudes, the occasional large one.
fn sparse_ac(rng: &mut ChaCha8Rng) -> Vec<i32> {
    let density = rng.random_range(0.0..0.3);
    (0..AC_LEN)
        .map(|_| {
            if rng.random_bool(density) {
                if rng.random_bool(0.05) {
                    rng.random_range(-1_000_000..1_000_000)
                } else {
                    rng.random_range(-8..=8)
                }
            } else {
                0
            }
        })
        .collect()
}

/// Total cost of an optimal prefix code: the sum of all merge weights.
fn optimal_cost(freqs: &BTreeMap<u16, u64>) -> u64 {
    if freqs.len() == 1 {
        return *freqs.values().next().unwrap();
    }
    let mut heap: BinaryHeap<Reverse<u64>> = freqs.values().map(|&f| Reverse(f)).collect();
    let mut cost = 0;
    while heap.len() > 1 {
        let Reverse(a) = heap.pop().unwrap();
        let Reverse(b) = heap.pop().unwrap();
        cost += a + b;
        heap.push(Reverse(a + b));
    }
    cost
}

#[test]
fn rle_and_dpcm_round_trip_many_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut dcs = Vec::new();
    for _ in 0..100_000 {
        let ac = sparse_ac(&mut rng);
        let symbols = rle_encode(&ac).unwrap();
        assert_eq!(rle_decode(&symbols).unwrap().as_slice(), ac.as_slice());
        dcs.push(rng.random_range(-5000..5000));
    }
    assert_eq!(dpcm_decode(&dpcm_encode(&dcs).unwrap()).unwrap(), dcs);
}

#[test]
fn all_zero_block_is_one_end_of_block() {
    assert_eq!(rle_encode(&[0; AC_LEN]).unwrap(), vec![RleSymbol::EOB]);
}

#[test]
fn long_zero_runs_use_sixteen_zero_symbols() {
    let mut ac = [0; AC_LEN];
    ac[40] = 3;
    let symbols = rle_encode(&ac).unwrap();
    assert_eq!(&symbols[..2], &[RleSymbol::ZRL, RleSymbol::ZRL]);
    assert_eq!((symbols[2].run, symbols[2].size), (8, 2));
    assert_eq!(symbols.last(), Some(&RleSymbol::EOB));
}

#[test]
fn amplitude_convention_matches_one_complement() {
    for v in [-1_000_000i64, -255, -3, -1, 1, 2, 3, 77, 1 << 20] {
        let s = size_category(v);
        assert!(v.unsigned_abs() < 1 << s && v.unsigned_abs() >= 1 << (s - 1));
        assert_eq!(amplitude_value(amplitude_bits(v, s), s), v);
    }
    assert_eq!(amplitude_bits(-3, 2), 0);
    assert_eq!(amplitude_bits(3, 2), 3);
}

#[test]
fn huffman_tables_are_complete_and_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(1..200u16);
        let freqs: BTreeMap<u16, u64> = (0..n)
            .map(|s| (s * 3, rng.random_range(1..10_000)))
            .collect();
        let table = huffman_build(&freqs).unwrap();
        assert!(table.max_len() <= MAX_CODE_LEN);
        if freqs.len() > 1 {
            assert!((table.kraft_sum() - 1.0).abs() < 1e-12);
        }
        let cost: u64 = freqs
            .iter()
            .map(|(s, f)| f * u64::from(table.code(*s).unwrap().1))
            .sum();
        assert_eq!(cost, optimal_cost(&freqs));

        let symbols: Vec<u16> = (0..1000).map(|_| rng.random_range(0..n) * 3).collect();
        let bits = huffman_encode(&symbols, &table).unwrap();
        assert_eq!(
            huffman_decode(&bits, &table, symbols.len()).unwrap(),
            symbols
        );
    }
}

#[test]
fn skewed_frequencies_respect_the_length_limit() {
    // Fibonacci weights force a degenerate tree far deeper than 16.
    let mut freqs = BTreeMap::new();
    let (mut a, mut b) = (1u64, 1u64);
    for s in 0..40u16 {
        freqs.insert(s, a);
        (a, b) = (b, a + b);
    }
    let table = huffman_build(&freqs).unwrap();
    assert_eq!(table.max_len(), MAX_CODE_LEN);
    assert!(table.kraft_sum() <= 1.0);
    let symbols: Vec<u16> = (0..40).collect();
    let bits = huffman_encode(&symbols, &table).unwrap();
    assert_eq!(huffman_decode(&bits, &table, 40).unwrap(), symbols);
}

fn random_frame(rng: &mut ChaCha8Rng) -> Vec<Vec<ZigzagCube>> {
    let channels = rng.random_range(1..14);
    let cubes = rng.random_range(0..40);
    (0..channels)
        .map(|_| {
            (0..cubes)
                .map(|_| {
                    let mut cube = [0i32; CUBE_LEN];
                    cube[0] = rng.random_range(-3000..3000);
                    cube[1..].copy_from_slice(&sparse_ac(rng));
                    cube
                })
                .collect()
        })
        .collect()
}

#[test]
fn coefficient_payloads_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let frame = random_frame(&mut rng);
        let bytes = encode_coefficients(&frame).unwrap();
        let back = decode_coefficients(&bytes).unwrap();
        if frame[0].is_empty() {
            assert!(back.iter().all(Vec::is_empty));
        } else {
            assert_eq!(back, frame);
        }
    }
}

#[test]
fn truncated_coefficient_payload_is_an_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut frame = random_frame(&mut rng);
    while frame[0].is_empty() {
        frame = random_frame(&mut rng);
    }
    let bytes = encode_coefficients(&frame).unwrap();
    for cut in [1, bytes.len() / 2, bytes.len() - 1] {
        assert!(decode_coefficients(&bytes[..cut]).is_err());
    }
}

#[test]
fn motion_payload_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let dims = Dims::new(32, 24, 40);
    for _ in 0..50 {
        let cells = 4 * 3 * 5;
        let palette: Vec<[i8; 3]> = (0..rng.random_range(1..6))
            .map(|_| std::array::from_fn(|_| rng.random_range(-8..=8)))
            .collect();
        let vectors: Vec<[i8; 3]> = (0..cells)
            .map(|_| palette[rng.random_range(0..palette.len())])
            .collect();
        let m = MotionGrid::from_vectors(dims, 8, vectors).unwrap();
        let bytes = encode_motion(&m).unwrap();
        let back = decode_motion(&bytes, dims, 8).unwrap();
        assert_eq!(back.vectors(), m.vectors());
    }
}

proptest! {
    #[test]
    fn rle_round_trips_arbitrary_blocks(
        entries in proptest::collection::vec((0usize..AC_LEN, -(1i32 << 30)..(1i32 << 30)), 0..64)
    ) {
        let mut ac = [0i32; AC_LEN];
        for (i, v) in entries {
            ac[i] = v;
        }
        let symbols = rle_encode(&ac).unwrap();
        prop_assert_eq!(rle_decode(&symbols).unwrap(), ac);
    }

    #[test]
    fn dpcm_round_trips(values in proptest::collection::vec(any::<i32>(), 1..200)) {
        prop_assert_eq!(dpcm_decode(&dpcm_encode(&values).unwrap()).unwrap(), values);
    }
}
