use std::sync::OnceLock;

use super::{cube_index, CUBE, CUBE_LEN};

/// Scan order: storage indices sorted by `u + v + w`, ties broken
/// lexicographically on `(u, v, w)`. Element 0 is DC.
pub fn zigzag_order() -> &'static [usize; CUBE_LEN] {
    static ORDER: OnceLock<[usize; CUBE_LEN]> = OnceLock::new();
    ORDER.get_or_init(|| {
        let mut coords = Vec::with_capacity(CUBE_LEN);
        for u in 0..CUBE {
            for v in 0..CUBE {
                for w in 0..CUBE {
                    coords.push((u + v + w, u, v, w));
                }
            }
        }
        coords.sort_unstable();
        let mut order = [0; CUBE_LEN];
        for (dst, (_, u, v, w)) in order.iter_mut().zip(coords) {
            *dst = cube_index(u, v, w);
        }
        order
    })
}

pub fn zigzag3<T: Copy + Default>(cube: &[T; CUBE_LEN]) -> [T; CUBE_LEN] {
    let mut out = [T::default(); CUBE_LEN];
    for (o, &src) in out.iter_mut().zip(zigzag_order()) {
        *o = cube[src];
    }
    out
}

pub fn unzigzag3<T: Copy + Default>(seq: &[T; CUBE_LEN]) -> [T; CUBE_LEN] {
    let mut out = [T::default(); CUBE_LEN];
    for (v, &dst) in seq.iter().zip(zigzag_order()) {
        out[dst] = *v;
    }
    out
}
