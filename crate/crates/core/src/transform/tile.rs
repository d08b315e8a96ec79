use super::{cube_index, CoeffCube, CUBE};
use crate::error::{Error, Result};
use crate::grid::{Dims, OccupancyMask};

/// Cuts the occupied 8^3 cubes out of one channel plane. Cubes that
/// overhang the lattice are zero-padded.
pub fn tile_cubes(
    channel: &[f32],
    dims: Dims,
    mask: &OccupancyMask,
) -> Result<Vec<CoeffCube<f64>>> {
    if mask.voxel_dims() != dims || mask.cube_size() != CUBE {
        return Err(Error::shape(format!(
            "mask tiles {} with cube {}, tensor is {}",
            mask.voxel_dims(),
            mask.cube_size(),
            dims
        )));
    }
    if channel.len() != dims.count() {
        return Err(Error::shape(format!(
            "channel has {} values, lattice {} needs {}",
            channel.len(),
            dims,
            dims.count()
        )));
    }
    let mut out = Vec::with_capacity(mask.occupied_count());
    for origin in mask.occupied() {
        let [cx, cy, cz] = mask.cube_coords(origin);
        let mut cube = CoeffCube::zeroed(origin);
        for k in 0..CUBE {
            let z = cz * CUBE + k;
            if z >= dims.nz {
                break;
            }
            for j in 0..CUBE {
                let y = cy * CUBE + j;
                if y >= dims.ny {
                    break;
                }
                let row = dims.index(cx * CUBE, y, z);
                let width = CUBE.min(dims.nx - cx * CUBE);
                for i in 0..width {
                    cube.values[cube_index(i, j, k)] = f64::from(channel[row + i]);
                }
            }
        }
        out.push(cube);
    }
    Ok(out)
}

/// Scatters cubes back into a zero-filled plane, dropping padding.
pub fn untile_cubes(cubes: &[CoeffCube<f64>], dims: Dims) -> Result<Vec<f32>> {
    let mut out = vec![0.0f32; dims.count()];
    untile_into(cubes, dims, &mut out)?;
    Ok(out)
}

pub(crate) fn untile_into(cubes: &[CoeffCube<f64>], dims: Dims, out: &mut [f32]) -> Result<()> {
    let lattice = dims.blocks(CUBE);
    for cube in cubes {
        if cube.origin >= lattice.count() {
            return Err(Error::OutOfRange {
                index: cube.origin,
                len: lattice.count(),
            });
        }
        let cx = cube.origin % lattice.nx;
        let cy = (cube.origin / lattice.nx) % lattice.ny;
        let cz = cube.origin / (lattice.nx * lattice.ny);
        for k in 0..CUBE {
            let z = cz * CUBE + k;
            if z >= dims.nz {
                break;
            }
            for j in 0..CUBE {
                let y = cy * CUBE + j;
                if y >= dims.ny {
                    break;
                }
                let row = dims.index(cx * CUBE, y, z);
                let width = CUBE.min(dims.nx - cx * CUBE);
                for i in 0..width {
                    out[row + i] = cube.values[cube_index(i, j, k)] as f32;
                }
            }
        }
    }
    Ok(())
}
