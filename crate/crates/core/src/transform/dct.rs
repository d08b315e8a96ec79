use std::f64::consts::PI;
use std::sync::OnceLock;

use super::{CUBE, CUBE_LEN};

/// `basis[u][i] = C_u cos((2i + 1) u pi / 2N)` with orthonormal `C_u`.
fn basis() -> &'static [[f64; CUBE]; CUBE] {
    static BASIS: OnceLock<[[f64; CUBE]; CUBE]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let n = CUBE as f64;
        let mut b = [[0.0; CUBE]; CUBE];
        for (u, row) in b.iter_mut().enumerate() {
            let c = if u == 0 {
                (1.0 / n).sqrt()
            } else {
                (2.0 / n).sqrt()
            };
            for (i, v) in row.iter_mut().enumerate() {
                *v = c * ((2 * i + 1) as f64 * u as f64 * PI / (2.0 * n)).cos();
            }
        }
        b
    })
}

/// One 1-D pass along the axis with element stride `stride`. All-zero
/// lines are left untouched: their transform is zero.
fn pass(data: &mut [f64; CUBE_LEN], stride: usize, inverse: bool) {
    let b = basis();
    let mut m = [[0.0; CUBE]; CUBE];
    for (k, row) in m.iter_mut().enumerate() {
        for (t, v) in row.iter_mut().enumerate() {
            *v = if inverse { b[t][k] } else { b[k][t] };
        }
    }
    let (outer_a, outer_b) = match stride {
        1 => (CUBE, CUBE * CUBE),
        s if s == CUBE => (1, CUBE * CUBE),
        _ => (1, CUBE),
    };
    let mut line = [0.0; CUBE];
    for a in 0..CUBE {
        for c in 0..CUBE {
            let start = a * outer_a + c * outer_b;
            for (t, v) in line.iter_mut().enumerate() {
                *v = data[start + t * stride];
            }
            if line.iter().all(|v| *v == 0.0) {
                continue;
            }
            for (k, row) in m.iter().enumerate() {
                let mut acc = 0.0;
                for (w, v) in row.iter().zip(&line) {
                    acc += w * v;
                }
                data[start + k * stride] = acc;
            }
        }
    }
}

/// Orthonormal type-II 3D DCT of an 8x8x8 cube, computed separably.
pub fn dct3(cube: &[f64; CUBE_LEN]) -> [f64; CUBE_LEN] {
    let mut out = *cube;
    pass(&mut out, 1, false);
    pass(&mut out, CUBE, false);
    pass(&mut out, CUBE * CUBE, false);
    out
}

/// Exact inverse of [`dct3`].
pub fn idct3(coeffs: &[f64; CUBE_LEN]) -> [f64; CUBE_LEN] {
    let mut out = *coeffs;
    pass(&mut out, CUBE * CUBE, true);
    pass(&mut out, CUBE, true);
    pass(&mut out, 1, true);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::cube_index;

    /// Direct evaluation of the triple-sum definition, O(N^6).
    fn direct_dct(x: &[f64; CUBE_LEN]) -> [f64; CUBE_LEN] {
        let n = CUBE as f64;
        let c = |u: usize| {
            if u == 0 {
                (1.0 / n).sqrt()
            } else {
                (2.0 / n).sqrt()
            }
        };
        let cosf = |i: usize, u: usize| ((2 * i + 1) as f64 * PI * u as f64 / (2.0 * n)).cos();
        let mut out = [0.0; CUBE_LEN];
        for w in 0..CUBE {
            for v in 0..CUBE {
                for u in 0..CUBE {
                    let mut acc = 0.0;
                    for k in 0..CUBE {
                        for j in 0..CUBE {
                            for i in 0..CUBE {
                                acc +=
                                    x[cube_index(i, j, k)] * cosf(i, u) * cosf(j, v) * cosf(k, w);
                            }
                        }
                    }
                    out[cube_index(u, v, w)] = c(u) * c(v) * c(w) * acc;
                }
            }
        }
        out
    }

    #[test]
    fn constant_cube_has_only_dc() {
        let r = dct3(&[1.0; CUBE_LEN]);
        assert!((r[0] - 22.627417).abs() < 1e-5);
        assert!(r[1..].iter().all(|v| v.abs() < 1e-5));
    }

    #[test]
    fn single_cosine_excites_one_coefficient() {
        let mut x = [0.0; CUBE_LEN];
        for k in 0..CUBE {
            for j in 0..CUBE {
                for i in 0..CUBE {
                    x[cube_index(i, j, k)] = ((2 * i + 1) as f64 * PI / 16.0).cos();
                }
            }
        }
        let direct = direct_dct(&x);
        let fast = dct3(&x);
        for (idx, (a, b)) in direct.iter().zip(&fast).enumerate() {
            assert!((a - b).abs() < 1e-9, "coefficient {idx}");
            if idx != cube_index(1, 0, 0) {
                assert!(a.abs() < 1e-9);
            }
        }
        assert!(direct[cube_index(1, 0, 0)].abs() > 1.0);
    }

    #[test]
    fn separable_matches_direct_on_pseudorandom_cube() {
        let mut x = [0.0; CUBE_LEN];
        for (i, v) in x.iter_mut().enumerate() {
            *v = ((i * 7919) % 113) as f64 / 56.0 - 1.0;
        }
        let direct = direct_dct(&x);
        let fast = dct3(&x);
        for (a, b) in direct.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-9);
        }
        let back = idct3(&fast);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
