use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rerf_core::transform::pca_fit;

fn random_rows(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<f32> {
    (0..m * n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn gram(rows: &[f32], n: usize) -> DMatrix<f64> {
    let m = rows.len() / n;
    let r = DMatrix::from_row_iterator(m, n, rows.iter().map(|v| f64::from(*v)));
    r.transpose() * &r / m as f64
}

#[test]
fn directions_match_a_reference_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let n = 13;
    // Anisotropic data so the spectrum is well separated.
    let scales: Vec<f32> = (0..n).map(|i| 1.0 / (1.0 + i as f32).powi(2)).collect();
    let rows: Vec<f32> = random_rows(&mut rng, 4000, n)
        .chunks(n)
        .flat_map(|r| {
            r.iter()
                .zip(&scales)
                .map(|(v, s)| v * s)
                .collect::<Vec<_>>()
        })
        .collect();
    let basis = pca_fit(&rows, n, 6).unwrap();

    let eig = SymmetricEigen::new(gram(&rows, n));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    for (j, &k) in order.iter().take(6).enumerate() {
        let ours = basis.direction(j);
        let dot: f64 = (0..n)
            .map(|i| f64::from(ours[i]) * eig.eigenvectors[(i, k)])
            .sum();
        assert!(
            dot.abs() > 1.0 - 1e-5,
            "direction {j}: |cos| = {}",
            dot.abs()
        );
    }
}

#[test]
fn bases_are_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for q in 1..=13 {
        let rows = random_rows(&mut rng, 500, 13);
        let basis = pca_fit(&rows, 13, q).unwrap();
        assert!(basis.orthonormality_error() <= 1e-5);
    }
}

#[test]
fn full_rank_round_trip_is_lossless() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let rows = random_rows(&mut rng, 300, 13);
    let basis = pca_fit(&rows, 13, 13).unwrap();
    let back = basis.backproject(&basis.project(&rows).unwrap()).unwrap();
    let err = rows
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f32::max);
    assert!(err <= 1e-5, "max error {err}");
}

#[test]
fn rank_one_data_needs_one_component() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let dir: Vec<f32> = (0..13).map(|_| rng.random_range(-1.0..1.0)).collect();
    let rows: Vec<f32> = (0..400)
        .flat_map(|_| {
            let s: f32 = rng.random_range(-3.0..3.0);
            dir.iter().map(move |d| s * d).collect::<Vec<_>>()
        })
        .collect();
    let basis = pca_fit(&rows, 13, 1).unwrap();
    let back = basis.backproject(&basis.project(&rows).unwrap()).unwrap();
    let err = rows
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f32::max);
    assert!(err <= 1e-4, "max error {err}");
}

#[test]
fn four_active_channels_concentrate_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let rows: Vec<f32> = (0..2000)
        .flat_map(|_| {
            let mut r = vec![0.0f32; 13];
            for v in r.iter_mut().take(4) {
                *v = rng.random_range(-1.0..1.0);
            }
            for v in r.iter_mut().skip(4) {
                *v = rng.random_range(-1e-3..1e-3);
            }
            r
        })
        .collect();
    let basis = pca_fit(&rows, 13, 13).unwrap();
    let coeffs = basis.project(&rows).unwrap();
    let mut per_dir = [0.0f64; 13];
    for row in coeffs.chunks(13) {
        for (e, c) in per_dir.iter_mut().zip(row) {
            *e += f64::from(*c).powi(2);
        }
    }
    let total: f64 = per_dir.iter().sum();
    let top4: f64 = per_dir[..4].iter().sum();
    assert!(top4 >= 0.99 * total, "top-4 share {}", top4 / total);
}

#[test]
fn invalid_ranks_are_rejected() {
    let rows = vec![1.0f32; 26];
    assert!(pca_fit(&rows, 13, 0).is_err());
    assert!(pca_fit(&rows, 13, 14).is_err());
    assert!(pca_fit(&rows[..25], 13, 2).is_err());
}
