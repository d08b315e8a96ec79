use super::{Dims, FeatureGrid};
use crate::error::{Error, Result};

/// Pooled motion components are stored as `i8` and clamped to this range.
pub const MOTION_CLAMP: i32 = 127;

/// Per-voxel displacement (in voxel units) from frame `t` back to `t - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMotionField {
    dims: Dims,
    data: Vec<f32>,
}

impl DenseMotionField {
    pub fn zeros(dims: Dims) -> Self {
        DenseMotionField {
            dims,
            data: vec![0.0; dims.count() * 3],
        }
    }

    /// `data` is three planes (dx, dy, dz), each x-fastest.
    pub fn from_data(dims: Dims, data: Vec<f32>) -> Result<Self> {
        if dims.count() == 0 {
            return Err(Error::invalid("motion field dims must be >= 1"));
        }
        if data.len() != dims.count() * 3 {
            return Err(Error::shape(format!(
                "motion data length {} does not match {} x 3",
                data.len(),
                dims
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite motion component"));
        }
        Ok(DenseMotionField { dims, data })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> [f32; 3] {
        let n = self.dims.count();
        let i = self.dims.index(x, y, z);
        [self.data[i], self.data[n + i], self.data[2 * n + i]]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, v: [f32; 3]) {
        let n = self.dims.count();
        let i = self.dims.index(x, y, z);
        self.data[i] = v[0];
        self.data[n + i] = v[1];
        self.data[2 * n + i] = v[2];
    }
}

/// Low-resolution lattice of integer voxel offsets, one per `K^3` cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionGrid {
    voxel_dims: Dims,
    kernel: usize,
    vectors: Vec<[i8; 3]>,
}

impl MotionGrid {
    pub fn zeros(voxel_dims: Dims, kernel: usize) -> Result<Self> {
        if kernel == 0 {
            return Err(Error::invalid("pooling kernel must be >= 1"));
        }
        Ok(MotionGrid {
            voxel_dims,
            kernel,
            vectors: vec![[0; 3]; voxel_dims.blocks(kernel).count()],
        })
    }

    pub fn from_vectors(voxel_dims: Dims, kernel: usize, vectors: Vec<[i8; 3]>) -> Result<Self> {
        let mut grid = MotionGrid::zeros(voxel_dims, kernel)?;
        if vectors.len() != grid.vectors.len() {
            return Err(Error::shape(format!(
                "motion grid for {} with kernel {} needs {} cells, got {}",
                voxel_dims,
                kernel,
                grid.vectors.len(),
                vectors.len()
            )));
        }
        if vectors
            .iter()
            .flatten()
            .any(|c| i32::from(*c).abs() > MOTION_CLAMP)
        {
            return Err(Error::invalid("motion component outside [-127, 127]"));
        }
        grid.vectors = vectors;
        Ok(grid)
    }

    /// Voxel lattice the grid was pooled from.
    pub fn voxel_dims(&self) -> Dims {
        self.voxel_dims
    }

    /// Cell lattice.
    pub fn dims(&self) -> Dims {
        self.voxel_dims.blocks(self.kernel)
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn vectors(&self) -> &[[i8; 3]] {
        &self.vectors
    }

    pub fn cell_count(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_zero(&self) -> bool {
        self.vectors.iter().all(|v| *v == [0; 3])
    }

    /// Offset applied to voxel `(x, y, z)`.
    #[inline]
    pub fn at_voxel(&self, x: usize, y: usize, z: usize) -> [i8; 3] {
        let k = self.kernel;
        self.vectors[self.dims().index(x / k, y / k, z / k)]
    }
}

/// Average-pools a dense motion field over `kernel^3` cubes. Means are
/// rounded to the nearest integer (ties away from zero) and clamped to
/// `[-127, 127]`; boundary cubes average only the voxels they contain.
pub fn motion_pool(dense: &DenseMotionField, kernel: usize) -> Result<MotionGrid> {
    let mut out = MotionGrid::zeros(dense.dims, kernel)?;
    let cells = out.dims();
    let dims = dense.dims;
    let mut sums = vec![[0.0f64; 3]; cells.count()];
    let mut counts = vec![0u32; cells.count()];
    for z in 0..dims.nz {
        for y in 0..dims.ny {
            for x in 0..dims.nx {
                let cell = cells.index(x / kernel, y / kernel, z / kernel);
                let v = dense.get(x, y, z);
                for a in 0..3 {
                    sums[cell][a] += f64::from(v[a]);
                }
                counts[cell] += 1;
            }
        }
    }
    for ((dst, sum), count) in out.vectors.iter_mut().zip(&sums).zip(&counts) {
        for a in 0..3 {
            let mean = sum[a] / f64::from(*count);
            let rounded = mean
                .round()
                .clamp(-f64::from(MOTION_CLAMP), f64::from(MOTION_CLAMP));
            dst[a] = rounded as i8;
        }
    }
    Ok(out)
}

/// Motion-compensated prediction: `out(p) = prev(p + M(cell(p)))` with
/// integer lookup. Sources outside the lattice give the zero vector.
pub fn warp_features(prev: &FeatureGrid, motion: &MotionGrid) -> Result<FeatureGrid> {
    let mut out = prev.clone();
    warp_in_place(&mut out, motion)?;
    Ok(out)
}

/// [`warp_features`] without the copy: only voxels in cells with a
/// nonzero offset are rewritten.
pub fn warp_in_place(grid: &mut FeatureGrid, motion: &MotionGrid) -> Result<()> {
    let dims = grid.dims();
    if motion.voxel_dims() != dims {
        return Err(Error::shape(format!(
            "motion grid pooled from {} cannot warp a {} grid",
            motion.voxel_dims(),
            dims
        )));
    }
    let k = motion.kernel();
    let cells = motion.dims();
    // Row segments along x: (dst start, src start or None per voxel run, len).
    let mut rows: Vec<(usize, usize, usize)> = Vec::new();
    let mut singles: Vec<(usize, Option<usize>)> = Vec::new();
    for (ci, m) in motion.vectors().iter().enumerate() {
        if *m == [0; 3] {
            continue;
        }
        let cx = ci % cells.nx;
        let cy = (ci / cells.nx) % cells.ny;
        let cz = ci / (cells.nx * cells.ny);
        let (x0, x1) = (cx * k, ((cx + 1) * k).min(dims.nx));
        let sx0 = x0 as i64 + i64::from(m[0]);
        let sx1 = x1 as i64 + i64::from(m[0]);
        for z in cz * k..((cz + 1) * k).min(dims.nz) {
            for y in cy * k..((cy + 1) * k).min(dims.ny) {
                let sy = y as i64 + i64::from(m[1]);
                let sz = z as i64 + i64::from(m[2]);
                let dst = dims.index(x0, y, z);
                if dims.contains(sx0, sy, sz) && dims.contains(sx1 - 1, sy, sz) {
                    rows.push((
                        dst,
                        dims.index(sx0 as usize, sy as usize, sz as usize),
                        x1 - x0,
                    ));
                    continue;
                }
                for x in x0..x1 {
                    let sx = x as i64 + i64::from(m[0]);
                    let src = dims
                        .contains(sx, sy, sz)
                        .then(|| dims.index(sx as usize, sy as usize, sz as usize));
                    singles.push((dst + x - x0, src));
                }
            }
        }
    }
    if rows.is_empty() && singles.is_empty() {
        return Ok(());
    }
    let plane = dims.count();
    let channels = grid.channels();
    let moved: usize = rows.iter().map(|r| r.2).sum::<usize>() + singles.len();
    let mut gathered = vec![0.0f32; moved];
    for c in 0..channels {
        let ch = &mut grid.data_mut()[c * plane..(c + 1) * plane];
        let mut at = 0;
        for &(_, src, len) in &rows {
            gathered[at..at + len].copy_from_slice(&ch[src..src + len]);
            at += len;
        }
        for (_, src) in &singles {
            gathered[at] = src.map_or(0.0, |s| ch[s]);
            at += 1;
        }
        let mut at = 0;
        for &(dst, _, len) in &rows {
            ch[dst..dst + len].copy_from_slice(&gathered[at..at + len]);
            at += len;
        }
        for (dst, _) in &singles {
            ch[*dst] = gathered[at];
            at += 1;
        }
    }
    Ok(())
}
