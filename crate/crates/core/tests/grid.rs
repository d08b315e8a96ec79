#![allow(clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rerf_core::synth::BlobSpec;
use rerf_core::{
    apply_residual, compute_residual, generate_sequence, motion_pool, occupancy_from_grid,
    warp_features, BBox, DenseMotionField, Dims, FeatureGrid, MotionGrid, OutOfBounds, SceneSpec,
};

fn random_grid(rng: &mut ChaCha8Rng, dims: Dims, channels: usize) -> FeatureGrid {
    let data = (0..dims.count() * channels)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    FeatureGrid::from_data(dims, channels, BBox::unit(), data).unwrap()
}

fn relative_l2(a: &FeatureGrid, b: &FeatureGrid) -> f64 {
    let num: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| f64::from(x - y).powi(2))
        .sum();
    let den: f64 = b.data().iter().map(|y| f64::from(*y).powi(2)).sum();
    (num / den).sqrt()
}

#[test]
fn trilinear_matches_corner_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let dims = Dims::cube(4);
    let g = random_grid(&mut rng, dims, 3);
    for _ in 0..200 {
        let p: [f32; 3] = std::array::from_fn(|_| rng.random_range(0.0..3.0));
        let got = g.trilinear_sample(p, OutOfBounds::Zero);
        let base = p.map(|v| (v.floor() as usize).min(2));
        let f: [f32; 3] = std::array::from_fn(|a| p[a] - base[a] as f32);
        for c in 0..3 {
            let mut want = 0.0f64;
            for corner in 0..8 {
                let o = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
                let w: f64 = (0..3)
                    .map(|a| f64::from(if o[a] == 1 { f[a] } else { 1.0 - f[a] }))
                    .product();
                want += w * f64::from(g.get(base[0] + o[0], base[1] + o[1], base[2] + o[2], c));
            }
            assert!((f64::from(got[c]) - want).abs() < 1e-6);
        }
    }
}

#[test]
fn pooling_averages_each_cube() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let dims = Dims::cube(16);
    let mut dense = DenseMotionField::zeros(dims);
    for z in 0..16 {
        for y in 0..16 {
            for x in 0..16 {
                dense.set(
                    x,
                    y,
                    z,
                    std::array::from_fn(|_| rng.random_range(-4.0..4.0)),
                );
            }
        }
    }
    let pooled = motion_pool(&dense, 8).unwrap();
    assert_eq!(pooled.dims(), Dims::cube(2));
    for cz in 0..2 {
        for cy in 0..2 {
            for cx in 0..2 {
                let mut sum = [0.0f64; 3];
                for z in 0..8 {
                    for y in 0..8 {
                        for x in 0..8 {
                            let v = dense.get(cx * 8 + x, cy * 8 + y, cz * 8 + z);
                            for a in 0..3 {
                                sum[a] += f64::from(v[a]);
                            }
                        }
                    }
                }
                let got = pooled.vectors()[cx + 2 * (cy + 2 * cz)];
                for a in 0..3 {
                    assert_eq!(f64::from(got[a]), (sum[a] / 512.0).round());
                }
            }
        }
    }
}

#[test]
fn pooled_cell_count_is_512_times_smaller() {
    for dims in [Dims::cube(64), Dims::new(32, 16, 48)] {
        let m = MotionGrid::zeros(dims, 8).unwrap();
        assert_eq!(m.cell_count() * 512, dims.count());
    }
    let m = MotionGrid::zeros(Dims::new(9, 17, 8), 8).unwrap();
    assert_eq!(m.dims(), Dims::new(2, 3, 1));
}

#[test]
fn zero_motion_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let g = random_grid(&mut rng, Dims::new(16, 8, 24), 5);
    let m = MotionGrid::zeros(g.dims(), 8).unwrap();
    assert_eq!(warp_features(&g, &m).unwrap(), g);
}

#[test]
fn uniform_offset_shifts_indices() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let dims = Dims::cube(16);
    let g = random_grid(&mut rng, dims, 2);
    let m = MotionGrid::from_vectors(dims, 8, vec![[1, 0, 0]; 8]).unwrap();
    let w = warp_features(&g, &m).unwrap();
    for z in 0..16 {
        for y in 0..16 {
            for x in 0..16 {
                for c in 0..2 {
                    let want = if x + 1 < 16 {
                        g.get(x + 1, y, z, c)
                    } else {
                        0.0
                    };
                    assert_eq!(w.get(x, y, z, c), want);
                }
            }
        }
    }
}

#[test]
fn residual_round_trip_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let dims = Dims::new(8, 12, 10);
    let base = random_grid(&mut rng, dims, 4);
    let target = random_grid(&mut rng, dims, 4);
    let r = compute_residual(&target, &base, 0.0).unwrap();
    for ((t, b), d) in target.data().iter().zip(base.data()).zip(r.data()) {
        assert_eq!(t - b, *d);
    }
    let back = apply_residual(&base, &r).unwrap();
    for ((o, b), d) in back.data().iter().zip(base.data()).zip(r.data()) {
        assert_eq!(o - b, *d);
    }
}

#[test]
fn threshold_zeroes_small_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let dims = Dims::cube(8);
    let base = random_grid(&mut rng, dims, 3);
    let target = random_grid(&mut rng, dims, 3);
    let mut last = usize::MAX;
    for tau in [0.0, 0.05, 0.1, 0.5, 1.0, 3.0] {
        let r = compute_residual(&target, &base, tau).unwrap();
        let zeroed = r.data().iter().filter(|v| **v == 0.0).count();
        let expect = target
            .data()
            .iter()
            .zip(base.data())
            .filter(|(t, b)| (*t - *b).abs() < tau || *t == *b)
            .count();
        assert_eq!(zeroed, expect);
        assert!(r.nonzero_count() <= last);
        last = r.nonzero_count();
    }
}

#[test]
fn occupancy_matches_per_cube_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let dims = Dims::new(24, 16, 20);
    let mut g = FeatureGrid::zeros(dims, 3, BBox::unit()).unwrap();
    for _ in 0..15 {
        let (x, y, z, c) = (
            rng.random_range(0..24),
            rng.random_range(0..16),
            rng.random_range(0..20),
            rng.random_range(0..3),
        );
        g.set(x, y, z, c, 1.5);
    }
    let mask = occupancy_from_grid(&g, 8).unwrap();
    let cubes = mask.dims();
    for i in 0..mask.len() {
        let [cx, cy, cz] = mask.cube_coords(i);
        let mut any = false;
        for z in cz * 8..((cz + 1) * 8).min(20) {
            for y in cy * 8..((cy + 1) * 8).min(16) {
                for x in cx * 8..((cx + 1) * 8).min(24) {
                    any |= (0..3).any(|c| g.get(x, y, z, c) != 0.0);
                }
            }
        }
        assert_eq!(mask.get(i), any, "cube {i} of {cubes}");
    }
}

fn single_blob(n: usize, frames: usize, v: f32) -> SceneSpec {
    let blob = BlobSpec::linear(
        [12.0, n as f32 / 2.0, n as f32 / 2.0],
        [v, 0.0, 0.0],
        frames,
        6.0,
        40.0,
        [0.8, 0.3, 0.2],
    );
    let mut spec = SceneSpec::new(Dims::cube(n), frames, vec![blob]);
    spec.texture = 0.25;
    spec.seed = 5;
    spec
}

#[test]
fn cube_aligned_translation_leaves_no_residual() {
    let seq = generate_sequence(&single_blob(64, 4, 8.0)).unwrap();
    for t in 1..4 {
        let m = motion_pool(&seq.motions[t - 1], 8).unwrap();
        let pred = warp_features(&seq.grids[t - 1], &m).unwrap();
        let r = compute_residual(&seq.grids[t], &pred, 0.0).unwrap();
        assert_eq!(r.nonzero_count(), 0, "frame {t}");
    }
}

#[test]
fn two_voxel_translation_warps_within_five_percent() {
    let seq = generate_sequence(&single_blob(64, 6, 2.0)).unwrap();
    for t in 1..6 {
        let m = motion_pool(&seq.motions[t - 1], 8).unwrap();
        let pred = warp_features(&seq.grids[t - 1], &m).unwrap();
        let err = relative_l2(&pred, &seq.grids[t]);
        assert!(err <= 0.05, "frame {t}: relative error {err}");
    }
}

#[test]
fn disjoint_blobs_occupy_the_union_of_their_cubes() {
    let dims = Dims::cube(64);
    let a = BlobSpec::linear([12.0, 12.0, 12.0], [0.0; 3], 1, 5.0, 30.0, [0.5; 3]);
    let b = BlobSpec::linear([45.0, 40.0, 50.0], [0.0; 3], 1, 7.0, 30.0, [0.5; 3]);
    let count = |blobs: Vec<BlobSpec>| {
        let seq = generate_sequence(&SceneSpec::new(dims, 1, blobs)).unwrap();
        occupancy_from_grid(&seq.grids[0], 8).unwrap()
    };
    let ma = count(vec![a.clone()]);
    let mb = count(vec![b.clone()]);
    let both = count(vec![a, b]);
    assert_eq!(both, ma.union(&mb).unwrap());
    assert_eq!(
        both.occupied_count(),
        ma.occupied_count() + mb.occupied_count()
    );
}

#[test]
fn generation_is_reproducible() {
    let spec = SceneSpec::demo(32, 3, 2);
    let a = generate_sequence(&spec).unwrap();
    let b = generate_sequence(&spec).unwrap();
    assert_eq!(a.grids, b.grids);
    assert_eq!(a.motions, b.motions);
}
