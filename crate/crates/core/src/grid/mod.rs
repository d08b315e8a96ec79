//! Feature-grid data model and the motion-compensation primitives that
//! operate on it: trilinear sampling, motion pooling, warping, and
//! residual computation.
//!
//! All grids are stored channel-planar: x varies fastest, then y, then z,
//! then channel. The same order is used on disk.

mod io;
mod motion;
mod occupancy;

pub use self::io::{
    read_grid, read_grid_file, read_motion, read_motion_file, write_grid, write_grid_file,
    write_motion, write_motion_file, GRID_MAGIC, MOTION_MAGIC,
};
pub use self::motion::{
    motion_pool, warp_features, warp_in_place, DenseMotionField, MotionGrid, MOTION_CLAMP,
};
pub use self::occupancy::{occupancy_from_grid, OccupancyMask};

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default feature channel count: one density channel plus twelve color features.
pub const DEFAULT_CHANNELS: usize = 13;

/// Voxel counts along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims {
    pub const fn new(nx: usize, ny: usize, nz: usize) -> Self {
        Dims { nx, ny, nz }
    }

    pub const fn cube(n: usize) -> Self {
        Dims {
            nx: n,
            ny: n,
            nz: n,
        }
    }

    pub fn count(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    /// Lattice of `k`-sized blocks covering these dims, rounding up.
    pub fn blocks(&self, k: usize) -> Dims {
        Dims {
            nx: self.nx.div_ceil(k),
            ny: self.ny.div_ceil(k),
            nz: self.nz.div_ceil(k),
        }
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.ny + y) * self.nx + x
    }

    #[inline]
    pub fn contains(&self, x: i64, y: i64, z: i64) -> bool {
        x >= 0
            && y >= 0
            && z >= 0
            && (x as usize) < self.nx
            && (y as usize) < self.ny
            && (z as usize) < self.nz
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

/// Axis-aligned world bounds. Voxel `i` along an axis sits at
/// `min + i * (max - min) / (n - 1)`, so the lattice corners touch the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: [f32; 3],
    pub max: [f32; 3],
}

impl BBox {
    pub const fn new(min: [f32; 3], max: [f32; 3]) -> Self {
        BBox { min, max }
    }

    pub fn unit() -> Self {
        BBox::new([-1.0; 3], [1.0; 3])
    }

    pub fn center(&self) -> [f32; 3] {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        ]
    }

    pub fn extent(&self) -> [f32; 3] {
        [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ]
    }

    pub(crate) fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if !(self.min[a].is_finite() && self.max[a].is_finite()) || self.min[a] >= self.max[a] {
                return Err(Error::invalid(format!("degenerate bbox {:?}", self)));
            }
        }
        Ok(())
    }
}

/// What trilinear sampling returns for points outside the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutOfBounds {
    /// Clamp the point onto the lattice.
    Clamp,
    /// Return the zero vector.
    Zero,
}

/// Dense lattice of `C`-channel feature vectors. Channel 0 is raw
/// (pre-activation) density, channels `1..C` are color features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    dims: Dims,
    channels: usize,
    bbox: BBox,
    data: Vec<f32>,
}

impl FeatureGrid {
    pub fn zeros(dims: Dims, channels: usize, bbox: BBox) -> Result<Self> {
        Self::check_shape(dims, channels)?;
        bbox.validate()?;
        Ok(FeatureGrid {
            dims,
            channels,
            bbox,
            data: vec![0.0; dims.count() * channels],
        })
    }

    pub fn from_data(dims: Dims, channels: usize, bbox: BBox, data: Vec<f32>) -> Result<Self> {
        Self::check_shape(dims, channels)?;
        bbox.validate()?;
        if data.len() != dims.count() * channels {
            return Err(Error::shape(format!(
                "data length {} does not match {} x {} channels",
                data.len(),
                dims,
                channels
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at index {i}")));
        }
        Ok(FeatureGrid {
            dims,
            channels,
            bbox,
            data,
        })
    }

    fn check_shape(dims: Dims, channels: usize) -> Result<()> {
        if dims.nx == 0 || dims.ny == 0 || dims.nz == 0 {
            return Err(Error::invalid(format!(
                "grid dims must be >= 1, got {dims}"
            )));
        }
        if channels < 2 {
            return Err(Error::invalid(format!(
                "grid needs density plus at least one color channel, got {channels}"
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.count()
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.voxel_count();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.voxel_count();
        &mut self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize, c: usize) -> f32 {
        self.data[c * self.voxel_count() + self.dims.index(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, c: usize, value: f32) {
        let n = self.voxel_count();
        self.data[c * n + self.dims.index(x, y, z)] = value;
    }

    /// Feature vector of one voxel.
    pub fn voxel(&self, x: usize, y: usize, z: usize) -> Vec<f32> {
        let n = self.voxel_count();
        let v = self.dims.index(x, y, z);
        (0..self.channels).map(|c| self.data[c * n + v]).collect()
    }

    pub fn same_shape(&self, other: &FeatureGrid) -> bool {
        self.dims == other.dims && self.channels == other.channels
    }

    pub(crate) fn ensure_same_shape(&self, other: &FeatureGrid, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::shape(format!(
                "{what}: {}x{} vs {}x{}",
                self.dims, self.channels, other.dims, other.channels
            )))
        }
    }

    /// Largest absolute value over all channels.
    pub fn max_abs(&self) -> f32 {
        self.data.iter().fold(0.0f32, |m, v| m.max(v.abs()))
    }

    /// Maps a world-space point into continuous grid coordinates.
    pub fn world_to_grid(&self, p: [f32; 3]) -> [f32; 3] {
        let n = self.dims.as_array();
        let mut g = [0.0; 3];
        for a in 0..3 {
            let span = (n[a].max(2) - 1) as f32;
            g[a] = (p[a] - self.bbox.min[a]) / (self.bbox.max[a] - self.bbox.min[a]) * span;
        }
        g
    }

    /// Trilinear interpolation of all channels at a continuous grid
    /// coordinate, written into `out` (length `C`).
    pub fn sample_into(&self, point: [f32; 3], policy: OutOfBounds, out: &mut [f32]) {
        debug_assert_eq!(out.len(), self.channels);
        let n = self.dims.as_array();
        let mut base = [0usize; 3];
        let mut frac = [0.0f32; 3];
        for a in 0..3 {
            let hi = (n[a] - 1) as f32;
            let mut p = point[a];
            if !(0.0..=hi).contains(&p) {
                match policy {
                    OutOfBounds::Zero => {
                        out.iter_mut().for_each(|v| *v = 0.0);
                        return;
                    }
                    OutOfBounds::Clamp => p = if p.is_nan() { 0.0 } else { p.clamp(0.0, hi) },
                }
            }
            if n[a] == 1 {
                base[a] = 0;
                frac[a] = 0.0;
            } else {
                let i = (p.floor() as usize).min(n[a] - 2);
                base[a] = i;
                frac[a] = p - i as f32;
            }
        }
        let step = [
            usize::from(n[0] > 1),
            if n[1] > 1 { n[0] } else { 0 },
            if n[2] > 1 { n[0] * n[1] } else { 0 },
        ];
        let origin = self.dims.index(base[0], base[1], base[2]);
        let [fx, fy, fz] = frac;
        let w = [
            (1.0 - fx) * (1.0 - fy) * (1.0 - fz),
            fx * (1.0 - fy) * (1.0 - fz),
            (1.0 - fx) * fy * (1.0 - fz),
            fx * fy * (1.0 - fz),
            (1.0 - fx) * (1.0 - fy) * fz,
            fx * (1.0 - fy) * fz,
            (1.0 - fx) * fy * fz,
            fx * fy * fz,
        ];
        let offs = [
            0,
            step[0],
            step[1],
            step[0] + step[1],
            step[2],
            step[0] + step[2],
            step[1] + step[2],
            step[0] + step[1] + step[2],
        ];
        let plane = self.voxel_count();
        for (c, o) in out.iter_mut().enumerate() {
            let ch = &self.data[c * plane..];
            let mut acc = 0.0f32;
            for k in 0..8 {
                acc += w[k] * ch[origin + offs[k]];
            }
            *o = acc;
        }
    }

    /// Allocating form of [`FeatureGrid::sample_into`].
    pub fn trilinear_sample(&self, point: [f32; 3], policy: OutOfBounds) -> Vec<f32> {
        let mut out = vec![0.0; self.channels];
        self.sample_into(point, policy, &mut out);
        out
    }
}

/// Sparse additive correction applied on top of a motion-warped base grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualGrid(FeatureGrid);

impl ResidualGrid {
    pub fn new(grid: FeatureGrid) -> Self {
        ResidualGrid(grid)
    }

    pub fn into_inner(self) -> FeatureGrid {
        self.0
    }

    pub fn nonzero_count(&self) -> usize {
        self.0.data.iter().filter(|v| **v != 0.0).count()
    }
}

impl Deref for ResidualGrid {
    type Target = FeatureGrid;

    fn deref(&self) -> &FeatureGrid {
        &self.0
    }
}

/// `f_t = base + residual`, elementwise.
pub fn apply_residual(base: &FeatureGrid, residual: &ResidualGrid) -> Result<FeatureGrid> {
    base.ensure_same_shape(residual, "apply_residual")?;
    let mut out = base.clone();
    for (o, r) in out.data.iter_mut().zip(&residual.data) {
        *o += *r;
    }
    Ok(out)
}

/// `target - base` with every entry of magnitude below `tau` zeroed.
pub fn compute_residual(
    target: &FeatureGrid,
    base: &FeatureGrid,
    tau: f32,
) -> Result<ResidualGrid> {
    target.ensure_same_shape(base, "compute_residual")?;
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::invalid(format!(
            "residual threshold must be >= 0, got {tau}"
        )));
    }
    let data = target
        .data
        .iter()
        .zip(&base.data)
        .map(|(t, b)| {
            let d = t - b;
            if d.abs() < tau {
                0.0
            } else {
                d
            }
        })
        .collect();
    Ok(ResidualGrid(FeatureGrid {
        dims: target.dims,
        channels: target.channels,
        bbox: target.bbox,
        data,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_grid(dims: Dims, channels: usize) -> FeatureGrid {
        let n = dims.count() * channels;
        let data = (0..n).map(|i| (i as f32 * 0.37).sin()).collect();
        FeatureGrid::from_data(dims, channels, BBox::unit(), data).unwrap()
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(FeatureGrid::zeros(Dims::new(0, 4, 4), 4, BBox::unit()).is_err());
        assert!(FeatureGrid::zeros(Dims::cube(4), 1, BBox::unit()).is_err());
        assert!(FeatureGrid::from_data(Dims::cube(2), 2, BBox::unit(), vec![0.0; 15]).is_err());
        let mut bad = vec![0.0; 16];
        bad[3] = f32::NAN;
        assert!(FeatureGrid::from_data(Dims::cube(2), 2, BBox::unit(), bad).is_err());
    }

    #[test]
    fn sample_at_lattice_point_is_exact() {
        let g = ramp_grid(Dims::new(6, 7, 8), 3);
        let v = g.trilinear_sample([3.0, 4.0, 5.0], OutOfBounds::Zero);
        assert_eq!(v, g.voxel(3, 4, 5));
        // upper corner uses the last cell with weight 1
        let v = g.trilinear_sample([5.0, 6.0, 7.0], OutOfBounds::Zero);
        assert_eq!(v, g.voxel(5, 6, 7));
    }

    #[test]
    fn sample_midpoint_along_x() {
        let mut g = FeatureGrid::zeros(Dims::cube(4), 2, BBox::unit()).unwrap();
        g.set(2, 1, 1, 0, 1.0);
        let v = g.trilinear_sample([1.5, 1.0, 1.0], OutOfBounds::Zero);
        assert!((v[0] - 0.5).abs() < 1e-7);
    }

    #[test]
    fn sample_out_of_bounds_policies() {
        let g = ramp_grid(Dims::cube(4), 2);
        assert_eq!(
            g.trilinear_sample([-0.5, 1.0, 1.0], OutOfBounds::Zero),
            vec![0.0, 0.0]
        );
        assert_eq!(
            g.trilinear_sample([-0.5, 1.0, 9.0], OutOfBounds::Clamp),
            g.voxel(0, 1, 3)
        );
    }

    #[test]
    fn sample_handles_singleton_axis() {
        let g = ramp_grid(Dims::new(4, 1, 3), 2);
        let v = g.trilinear_sample([2.0, 0.0, 1.0], OutOfBounds::Zero);
        assert_eq!(v, g.voxel(2, 0, 1));
    }

    #[test]
    fn residual_identities() {
        let base = ramp_grid(Dims::cube(4), 3);
        let zero = FeatureGrid::zeros(Dims::cube(4), 3, BBox::unit()).unwrap();
        let r = compute_residual(&base, &base, 0.3).unwrap();
        assert_eq!(r.nonzero_count(), 0);
        assert_eq!(
            apply_residual(&base, &ResidualGrid::new(zero.clone())).unwrap(),
            base
        );
        assert_eq!(
            apply_residual(&zero, &ResidualGrid::new(base.clone())).unwrap(),
            base
        );
    }

    #[test]
    fn residual_errors() {
        let a = ramp_grid(Dims::cube(4), 3);
        let b = ramp_grid(Dims::cube(4), 2);
        assert!(matches!(
            compute_residual(&a, &b, 0.0),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            compute_residual(&a, &a, -1.0),
            Err(Error::InvalidArgument(_))
        ));
        let r = compute_residual(&a, &a, 0.0).unwrap();
        assert!(apply_residual(&b, &r).is_err());
    }

    #[test]
    fn threshold_count_matches_brute_force() {
        let target = ramp_grid(Dims::cube(5), 3);
        let base = FeatureGrid::from_data(
            Dims::cube(5),
            3,
            BBox::unit(),
            (0..375).map(|i| (i as f32 * 0.11).cos() * 0.8).collect(),
        )
        .unwrap();
        let r = compute_residual(&target, &base, 0.1).unwrap();
        let expected_zeroed = target
            .data()
            .iter()
            .zip(base.data())
            .filter(|(t, b)| (*t - *b).abs() < 0.1)
            .count();
        assert_eq!(r.data().len() - r.nonzero_count(), expected_zeroed);
        for v in r.data() {
            assert!(*v == 0.0 || v.abs() >= 0.1);
        }
    }
}
