use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rerf_core::transform::{
    cube_index, dct3, dequantize, idct3, quantize, unzigzag3, zigzag3, zigzag_order,
    QuantizationSpec, CUBE, CUBE_LEN,
};

/// Direct evaluation of the orthonormal 3D DCT-II sum.
fn naive_dct3(x: &[f64; CUBE_LEN]) -> [f64; CUBE_LEN] {
    let n = CUBE as f64;
    let c = |k: usize| {
        if k == 0 {
            (1.0 / n).sqrt()
        } else {
            (2.0 / n).sqrt()
        }
    };
    let basis = |k: usize, i: usize| {
        c(k) * (std::f64::consts::PI * (2.0 * i as f64 + 1.0) * k as f64 / (2.0 * n)).cos()
    };
    let mut out = [0.0; CUBE_LEN];
    for w in 0..CUBE {
        for v in 0..CUBE {
            for u in 0..CUBE {
                let mut s = 0.0;
                for k in 0..CUBE {
                    for j in 0..CUBE {
                        for i in 0..CUBE {
                            s += x[cube_index(i, j, k)] * basis(u, i) * basis(v, j) * basis(w, k);
                        }
                    }
                }
                out[cube_index(u, v, w)] = s;
            }
        }
    }
    out
}

fn random_cube(rng: &mut ChaCha8Rng, scale: f64) -> [f64; CUBE_LEN] {
    std::array::from_fn(|_| rng.random_range(-scale..scale))
}

#[test]
fn dct_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..3 {
        let x = random_cube(&mut rng, 10.0);
        let fast = dct3(&x);
        let slow = naive_dct3(&x);
        let err = fast
            .iter()
            .zip(&slow)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "max deviation {err}");
    }
}

#[test]
fn round_trip_and_energy_on_random_cubes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let x = random_cube(&mut rng, 100.0);
        let c = dct3(&x);
        let back = idct3(&c);
        let err = x
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-5);
        let e0: f64 = x.iter().map(|v| v * v).sum();
        let e1: f64 = c.iter().map(|v| v * v).sum();
        assert!((e0 - e1).abs() <= 1e-4 * e0);
    }
}

#[test]
fn constant_cube_is_pure_dc() {
    let c = dct3(&[1.0; CUBE_LEN]);
    assert!((c[0] - 22.627417).abs() < 1e-5);
    assert!(c[1..].iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn quantization_error_is_bounded_by_half_step() {
    let q = QuantizationSpec::with_default_matrix(0.37).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let c = random_cube(&mut rng, 50.0);
        let back = dequantize(&quantize(&c, &q).unwrap(), &q);
        for i in 0..CUBE_LEN {
            assert!((c[i] - back[i]).abs() <= 0.5 * q.step(i) + 1e-9);
        }
    }
}

#[test]
fn level_ten_point_six_at_step_two_rounds_to_five() {
    let q = QuantizationSpec::new(1.0, [2.0; CUBE_LEN]).unwrap();
    let mut c = [0.0; CUBE_LEN];
    c[0] = 10.6;
    assert_eq!(quantize(&c, &q).unwrap()[0], 5);
}

#[test]
fn zigzag_scan_is_ordered_by_frequency_sum() {
    let order = zigzag_order();
    assert_eq!(order[0], 0);
    let freq = |idx: usize| idx % CUBE + (idx / CUBE) % CUBE + idx / (CUBE * CUBE);
    assert!(order.windows(2).all(|w| freq(w[0]) <= freq(w[1])));
    assert_eq!(order[CUBE_LEN - 1], CUBE_LEN - 1);
}

proptest! {
    #[test]
    fn zigzag_is_a_permutation(values in proptest::collection::vec(any::<i32>(), CUBE_LEN)) {
        let cube: [i32; CUBE_LEN] = values.try_into().unwrap();
        prop_assert_eq!(unzigzag3(&zigzag3(&cube)), cube);
    }

    #[test]
    fn dct_is_linear(a in -50.0f64..50.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_cube(&mut rng, 5.0);
        let y = random_cube(&mut rng, 5.0);
        let mix: [f64; CUBE_LEN] = std::array::from_fn(|i| a * x[i] + y[i]);
        let (cx, cy, cm) = (dct3(&x), dct3(&y), dct3(&mix));
        for i in 0..CUBE_LEN {
            prop_assert!((cm[i] - (a * cx[i] + cy[i])).abs() < 1e-8);
        }
    }
}
