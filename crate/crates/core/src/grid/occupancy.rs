use super::{Dims, FeatureGrid};
use crate::error::{Error, Result};

/// One bit per `K^3` cube of a grid lattice; set when the cube holds any
/// nonzero value in the tensor it was computed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyMask {
    voxel_dims: Dims,
    cube: usize,
    bits: Vec<bool>,
}

impl OccupancyMask {
    pub fn empty(voxel_dims: Dims, cube: usize) -> Result<Self> {
        if cube == 0 {
            return Err(Error::invalid("cube size must be >= 1"));
        }
        Ok(OccupancyMask {
            voxel_dims,
            cube,
            bits: vec![false; voxel_dims.blocks(cube).count()],
        })
    }

    pub fn full(voxel_dims: Dims, cube: usize) -> Result<Self> {
        let mut m = Self::empty(voxel_dims, cube)?;
        m.bits.iter_mut().for_each(|b| *b = true);
        Ok(m)
    }

    pub fn voxel_dims(&self) -> Dims {
        self.voxel_dims
    }

    pub fn cube_size(&self) -> usize {
        self.cube
    }

    /// Cube lattice dims.
    pub fn dims(&self) -> Dims {
        self.voxel_dims.blocks(self.cube)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, cube_index: usize) -> bool {
        self.bits[cube_index]
    }

    pub fn set(&mut self, cube_index: usize, value: bool) {
        self.bits[cube_index] = value;
    }

    pub fn occupied_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Occupied cube indices in lattice order (x fastest).
    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
    }

    /// Cube origin (in cube units) of a lattice index.
    pub fn cube_coords(&self, cube_index: usize) -> [usize; 3] {
        let d = self.dims();
        [
            cube_index % d.nx,
            (cube_index / d.nx) % d.ny,
            cube_index / (d.nx * d.ny),
        ]
    }

    pub fn union(&self, other: &OccupancyMask) -> Result<OccupancyMask> {
        if self.voxel_dims != other.voxel_dims || self.cube != other.cube {
            return Err(Error::shape("occupancy masks tile different lattices"));
        }
        let mut out = self.clone();
        for (a, b) in out.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        Ok(out)
    }

    /// Packs the bits MSB-first into bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, b) in self.bits.iter().enumerate() {
            if *b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn from_bytes(voxel_dims: Dims, cube: usize, bytes: &[u8]) -> Result<Self> {
        let mut m = Self::empty(voxel_dims, cube)?;
        if bytes.len() != m.bits.len().div_ceil(8) {
            return Err(Error::corrupt(format!(
                "occupancy mask needs {} bytes, got {}",
                m.bits.len().div_ceil(8),
                bytes.len()
            )));
        }
        for (i, b) in m.bits.iter_mut().enumerate() {
            *b = bytes[i / 8] & (0x80 >> (i % 8)) != 0;
        }
        Ok(m)
    }
}

/// Marks every `k^3` cube that holds a nonzero value in any channel.
pub fn occupancy_from_grid(tensor: &FeatureGrid, k: usize) -> Result<OccupancyMask> {
    let dims = tensor.dims();
    let mut mask = OccupancyMask::empty(dims, k)?;
    let cubes = mask.dims();
    let plane = dims.count();
    for c in 0..tensor.channels() {
        let ch = &tensor.data()[c * plane..(c + 1) * plane];
        for z in 0..dims.nz {
            for y in 0..dims.ny {
                let row = &ch[dims.index(0, y, z)..dims.index(0, y, z) + dims.nx];
                for (x, v) in row.iter().enumerate() {
                    if *v != 0.0 {
                        mask.bits[cubes.index(x / k, y / k, z / k)] = true;
                    }
                }
            }
        }
    }
    Ok(mask)
}
