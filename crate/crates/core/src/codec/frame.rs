//! Per-frame lossy path shared by encoder and decoder.

use std::time::Instant;

use rayon::prelude::*;

use super::StageTimes;
use crate::entropy::ZigzagCube;
use crate::error::{Error, Result};
use crate::grid::{Dims, FeatureGrid, OccupancyMask};
use crate::transform::{
    cube_index, dct3, dequantize, idct3, quantize, tile_cubes, unzigzag3, zigzag3, CoeffCube,
    PcaBasis, QuantizationSpec, CUBE, CUBE_LEN,
};

/// Quantized, zigzagged cubes of every coded plane for the cubes set in
/// `mask`. Cubes whose levels are zero in every plane are removed from
/// the returned mask: they would reconstruct to zero anyway.
pub(crate) fn forward_levels<P: AsRef<[f32]>>(
    planes: &[P],
    dims: Dims,
    mask: &OccupancyMask,
    quant: &QuantizationSpec,
) -> Result<(OccupancyMask, Vec<Vec<ZigzagCube>>)> {
    let levels: Vec<Vec<ZigzagCube>> = planes
        .iter()
        .map(|plane| {
            tile_cubes(plane.as_ref(), dims, mask)?
                .par_iter()
                .map(|cube| Ok(zigzag3(&quantize(&dct3(&cube.values), quant)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let origins: Vec<usize> = mask.occupied().collect();
    let keep: Vec<bool> = (0..origins.len())
        .map(|i| levels.iter().any(|ch| ch[i].iter().any(|v| *v != 0)))
        .collect();
    let mut pruned = mask.clone();
    for (o, k) in origins.iter().zip(&keep) {
        pruned.set(*o, *k);
    }
    let levels = levels
        .into_iter()
        .map(|ch| {
            ch.into_iter()
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|(c, _)| c)
                .collect()
        })
        .collect();
    Ok((pruned, levels))
}

/// Inverse of the lossy path: levels -> dequantize -> IDCT -> untile,
/// optional PCA back-projection, then addition onto `base` (P-frames) or
/// a zero grid (I-frames). Timings are accumulated into `times`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn reconstruct(
    levels: &[Vec<ZigzagCube>],
    mask: &OccupancyMask,
    pca: Option<&PcaBasis>,
    base: Option<FeatureGrid>,
    quant: &QuantizationSpec,
    template: &FeatureGrid,
    times: &mut StageTimes,
) -> Result<FeatureGrid> {
    let dims = template.dims();
    let channels = template.channels();
    if mask.occupied_count() == 0 {
        if levels.iter().any(|ch| !ch.is_empty()) {
            return Err(Error::corrupt("payload carries cubes for an empty mask"));
        }
        let start = Instant::now();
        let out = match base {
            Some(b) => {
                template.ensure_same_shape(&b, "prediction")?;
                b
            }
            None => FeatureGrid::zeros(dims, channels, template.bbox())?,
        };
        times.warp_add += start.elapsed();
        return Ok(out);
    }
    let coded = pca.map_or(channels, PcaBasis::rank);
    if levels.len() != coded {
        return Err(Error::corrupt(format!(
            "payload carries {} planes, expected {coded}",
            levels.len()
        )));
    }
    if let Some(p) = pca {
        if p.channels() != channels {
            return Err(Error::corrupt("PCA basis does not match the channel count"));
        }
    }
    let origins: Vec<usize> = mask.occupied().collect();
    if levels.iter().any(|ch| ch.len() != origins.len()) {
        return Err(Error::corrupt(format!(
            "payload cube count disagrees with the {} occupied cubes",
            origins.len()
        )));
    }

    let start = Instant::now();
    let spatial: Vec<Vec<[i32; CUBE_LEN]>> = levels
        .iter()
        .map(|ch| ch.iter().map(unzigzag3).collect())
        .collect();
    times.entropy += start.elapsed();

    let start = Instant::now();
    let coeffs: Vec<Vec<Option<Box<[f64; CUBE_LEN]>>>> = spatial
        .iter()
        .map(|ch| {
            ch.iter()
                .map(|l| {
                    l.iter()
                        .any(|v| *v != 0)
                        .then(|| Box::new(dequantize(l, quant)))
                })
                .collect()
        })
        .collect();
    times.dequantize += start.elapsed();

    let start = Instant::now();
    let cubes: Vec<Vec<CoeffCube<f64>>> = coeffs
        .iter()
        .map(|ch| {
            ch.iter()
                .zip(&origins)
                .map(|(c, o)| match c {
                    Some(c) => CoeffCube {
                        origin: *o,
                        values: Box::new(idct3(c)),
                    },
                    None => CoeffCube::zeroed(*o),
                })
                .collect()
        })
        .collect();
    times.idct += start.elapsed();

    let start = Instant::now();
    let mut out = match base {
        Some(b) => {
            template.ensure_same_shape(&b, "prediction")?;
            b
        }
        None => FeatureGrid::zeros(dims, channels, template.bbox())?,
    };
    let plane = dims.count();
    let lattice = dims.blocks(CUBE);
    let add_cube = |dst: &mut [f32], cube: &CoeffCube<f64>| {
        let cx = cube.origin % lattice.nx;
        let cy = (cube.origin / lattice.nx) % lattice.ny;
        let cz = cube.origin / (lattice.nx * lattice.ny);
        for k in 0..CUBE.min(dims.nz - cz * CUBE) {
            for j in 0..CUBE.min(dims.ny - cy * CUBE) {
                let row = dims.index(cx * CUBE, cy * CUBE + j, cz * CUBE + k);
                for i in 0..CUBE.min(dims.nx - cx * CUBE) {
                    dst[row + i] += cube.values[cube_index(i, j, k)] as f32;
                }
            }
        }
    };
    match pca {
        None => {
            for (c, ch) in cubes.iter().enumerate() {
                let dst = &mut out.data_mut()[c * plane..(c + 1) * plane];
                for cube in ch {
                    add_cube(dst, cube);
                }
            }
        }
        Some(basis) => {
            // Back-projection `r = r' V^T`, skipping planes whose cube
            // decoded to zero.
            let v: Vec<f64> = basis.matrix().iter().map(|x| f64::from(*x)).collect();
            let data = out.data_mut();
            let mut back = vec![0.0f64; CUBE_LEN];
            for (n, origin) in origins.iter().enumerate() {
                let active: Vec<usize> = (0..coded).filter(|j| coeffs[*j][n].is_some()).collect();
                if active.is_empty() {
                    continue;
                }
                let cx = origin % lattice.nx;
                let cy = (origin / lattice.nx) % lattice.ny;
                let cz = origin / (lattice.nx * lattice.ny);
                for c in 0..channels {
                    back.iter_mut().for_each(|b| *b = 0.0);
                    for &p in &active {
                        let w = v[c * coded + p];
                        for (b, r) in back.iter_mut().zip(cubes[p][n].values.iter()) {
                            *b += r * w;
                        }
                    }
                    let dst = &mut data[c * plane..(c + 1) * plane];
                    for k in 0..CUBE.min(dims.nz - cz * CUBE) {
                        for j in 0..CUBE.min(dims.ny - cy * CUBE) {
                            let row = dims.index(cx * CUBE, cy * CUBE + j, cz * CUBE + k);
                            let src = &back[cube_index(0, j, k)..];
                            let w = CUBE.min(dims.nx - cx * CUBE);
                            for (d, b) in dst[row..row + w].iter_mut().zip(src) {
                                *d += *b as f32;
                            }
                        }
                    }
                }
            }
        }
    }
    times.warp_add += start.elapsed();
    Ok(out)
}

/// Rows of `grid` with any nonzero entry, as `(voxel, values)` in voxel order.
pub(crate) fn nonzero_rows(grid: &FeatureGrid) -> Vec<(usize, Vec<f32>)> {
    let plane = grid.voxel_count();
    let c = grid.channels();
    let data = grid.data();
    (0..plane)
        .filter_map(|v| {
            let row: Vec<f32> = (0..c).map(|ch| data[ch * plane + v]).collect();
            row.iter().any(|x| *x != 0.0).then_some((v, row))
        })
        .collect()
}
