//! Deterministic synthetic dynamic scenes: Gaussian blobs moving along
//! per-frame paths, rasterized into feature grids together with the exact
//! dense motion that maps each frame back onto its predecessor.
//!
//! Blob paths are given in voxel coordinates so that integer velocities
//! translate the rasterized content exactly.

mod files;

pub use self::files::{load_sequence, write_sequence, SPEC_FILE};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BBox, DenseMotionField, Dims, FeatureGrid, DEFAULT_CHANNELS};
use crate::render::{inverse_color, inverse_density_activation, DEFAULT_DENSITY_SHIFT};

const DEMO_STATIC_BLOBS: usize = 24;
const DEMO_FIELD_SEED: u64 = 11;

/// Gaussian falloff: the support radius spans this many standard deviations.
const SIGMAS_PER_RADIUS: f32 = 2.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    /// Center at every frame, in voxel coordinates.
    pub path: Vec<[f32; 3]>,
    /// Support radius in voxels.
    pub radius: f32,
    /// Activated density at the center.
    pub peak_density: f32,
    /// Direct-mode RGB in (0, 1).
    pub color: [f32; 3],
}

impl BlobSpec {
    /// Blob starting at `start` and moving by `velocity` voxels per frame.
    pub fn linear(
        start: [f32; 3],
        velocity: [f32; 3],
        frames: usize,
        radius: f32,
        peak_density: f32,
        color: [f32; 3],
    ) -> Self {
        let path = (0..frames)
            .map(|t| {
                let t = t as f32;
                [
                    start[0] + t * velocity[0],
                    start[1] + t * velocity[1],
                    start[2] + t * velocity[2],
                ]
            })
            .collect();
        BlobSpec {
            path,
            radius,
            peak_density,
            color,
        }
    }
}

fn default_channels() -> usize {
    DEFAULT_CHANNELS
}

fn default_motion_cube() -> usize {
    8
}

fn default_shift() -> f32 {
    DEFAULT_DENSITY_SHIFT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub dims: Dims,
    #[serde(default = "default_channels")]
    pub channels: usize,
    #[serde(default = "BBox::unit")]
    pub bbox: BBox,
    pub frames: usize,
    pub blobs: Vec<BlobSpec>,
    #[serde(default)]
    pub seed: u64,
    /// Amplitude of the seeded texture added to the color channels, in
    /// logit units. Zero gives flat colors.
    #[serde(default)]
    pub texture: f32,
    /// Dense motion is written over every cube of this edge touched by a
    /// moving blob, so pooling with the same kernel is exact. Zero limits
    /// it to the blob's support.
    #[serde(default = "default_motion_cube")]
    pub motion_cube: usize,
    /// Renderer density shift the raw densities are solved against.
    #[serde(default = "default_shift")]
    pub density_shift: f32,
}

impl SceneSpec {
    pub fn new(dims: Dims, frames: usize, blobs: Vec<BlobSpec>) -> Self {
        SceneSpec {
            dims,
            channels: DEFAULT_CHANNELS,
            bbox: BBox::unit(),
            frames,
            blobs,
            seed: 0,
            texture: 0.0,
            motion_cube: default_motion_cube(),
            density_shift: DEFAULT_DENSITY_SHIFT,
        }
    }

    /// Demo scene on a cube-shaped grid of edge `n`: two blobs moving by
    /// `velocity` voxels per frame along x in opposite directions and
    /// bouncing between the walls, inside a band of the lower `3n/8`
    /// rows, plus a seeded field of static blobs above that band.
    pub fn demo(n: usize, frames: usize, velocity: i32) -> Self {
        let nf = n as f32;
        let radius = (nf / 8.0).max(2.0);
        let lo = radius + 1.0;
        let hi = nf - 2.0 - radius;
        let bounce = |start: f32, v: f32| {
            let (mut x, mut v) = (start, v);
            let mut path = Vec::with_capacity(frames);
            for _ in 0..frames {
                path.push(x);
                if x + v > hi || x + v < lo {
                    v = -v;
                }
                x += v;
            }
            path
        };
        let v = velocity as f32;
        let y = (0.22 * nf).max(radius);
        let mut blobs = vec![
            BlobSpec {
                path: bounce(lo, v)
                    .into_iter()
                    .map(|x| [x, y, 0.25 * nf])
                    .collect(),
                radius,
                peak_density: 40.0,
                color: [0.85, 0.3, 0.2],
            },
            BlobSpec {
                path: bounce(hi, -v)
                    .into_iter()
                    .map(|x| [x, y, 0.69 * nf])
                    .collect(),
                radius,
                peak_density: 30.0,
                color: [0.3, 0.8, 0.3],
            },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(DEMO_FIELD_SEED);
        let band = (3 * n / 8) as f32;
        for _ in 0..DEMO_STATIC_BLOBS {
            let r = rng.random_range(nf / 12.0..nf / 6.0);
            let top = nf - 1.0 - r;
            let center = [
                rng.random_range(r..top),
                rng.random_range((band + r).min(top)..=top),
                rng.random_range(r..top),
            ];
            let color = [(); 3].map(|_| rng.random_range(0.1..0.9));
            let density = rng.random_range(10.0..50.0);
            blobs.push(BlobSpec::linear(
                center, [0.0; 3], frames, r, density, color,
            ));
        }
        let mut spec = SceneSpec::new(Dims::cube(n), frames, blobs);
        spec.seed = 7;
        spec.texture = 0.25;
        spec
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::invalid("scene needs at least one frame"));
        }
        if self.dims.count() == 0 {
            return Err(Error::invalid("scene grid is empty"));
        }
        if self.channels < 4 {
            return Err(Error::invalid(
                "scenes need a density and three color channels",
            ));
        }
        self.bbox.validate()?;
        let n = self.dims.as_array();
        for (b, blob) in self.blobs.iter().enumerate() {
            if blob.path.len() != self.frames {
                return Err(Error::invalid(format!(
                    "blob {b} path has {} positions for {} frames",
                    blob.path.len(),
                    self.frames
                )));
            }
            if !(blob.radius > 0.0 && blob.peak_density > 0.0 && blob.peak_density.is_finite()) {
                return Err(Error::invalid(format!(
                    "blob {b} needs positive radius and density"
                )));
            }
            if blob.color.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
                return Err(Error::invalid(format!(
                    "blob {b} color must lie strictly inside (0, 1)"
                )));
            }
            for (t, c) in blob.path.iter().enumerate() {
                for a in 0..3 {
                    let hi = (n[a] - 1) as f32 - blob.radius;
                    if !(c[a] >= blob.radius && c[a] <= hi) {
                        return Err(Error::invalid(format!(
                            "blob {b} leaves the grid (with margin {}) at frame {t}",
                            blob.radius
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub grids: Vec<FeatureGrid>,
    /// `motions[t]` maps frame `t + 1` onto frame `t`.
    pub motions: Vec<DenseMotionField>,
    pub spec: SceneSpec,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Texture sample in [-1, 1] at an integer offset from a blob center.
fn texture(seed: u64, blob: usize, offset: [i64; 3], channel: usize) -> f32 {
    let mut h = splitmix(seed ^ (blob as u64).wrapping_mul(0x1000_0000_01b3));
    for o in offset {
        h = splitmix(h ^ o as u64);
    }
    h = splitmix(h ^ channel as u64);
    ((h >> 40) as f32 / (1u64 << 24) as f32) * 2.0 - 1.0
}

/// Voxel range `[lo, hi]` along one axis covered by a sphere.
fn span(center: f32, radius: f32, n: usize) -> (usize, usize) {
    let lo = (center - radius).ceil().max(0.0) as usize;
    let hi = ((center + radius).floor() as i64).clamp(0, n as i64 - 1) as usize;
    (lo, hi)
}

fn rasterize(spec: &SceneSpec, t: usize) -> Result<FeatureGrid> {
    let dims = spec.dims;
    let mut grid = FeatureGrid::zeros(dims, spec.channels, spec.bbox)?;
    let plane = dims.count();
    let mut best = vec![0.0f32; plane];
    let data = grid.data_mut();
    for (b, blob) in spec.blobs.iter().enumerate() {
        let c = blob.path[t];
        let sigma_len = blob.radius / SIGMAS_PER_RADIUS;
        let r2 = blob.radius * blob.radius;
        let (x0, x1) = span(c[0], blob.radius, dims.nx);
        let (y0, y1) = span(c[1], blob.radius, dims.ny);
        let (z0, z1) = span(c[2], blob.radius, dims.nz);
        let logits = blob.color.map(inverse_color);
        for z in z0..=z1 {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let d = [x as f32 - c[0], y as f32 - c[1], z as f32 - c[2]];
                    let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                    if d2 > r2 {
                        continue;
                    }
                    let sigma = blob.peak_density * (-d2 / (2.0 * sigma_len * sigma_len)).exp();
                    let v = dims.index(x, y, z);
                    if sigma <= best[v] {
                        continue;
                    }
                    best[v] = sigma;
                    data[v] = inverse_density_activation(sigma, spec.density_shift);
                    let offset = d.map(|o| o.round() as i64);
                    for (k, l) in logits.iter().enumerate() {
                        let tex = if spec.texture == 0.0 {
                            0.0
                        } else {
                            spec.texture * texture(spec.seed, b, offset, k)
                        };
                        data[(k + 1) * plane + v] = l + tex;
                    }
                }
            }
        }
    }
    Ok(grid)
}

/// Dense field for frame `t >= 1`: `-velocity` over each moving blob's
/// region, zero elsewhere.
fn motion_field(spec: &SceneSpec, t: usize) -> DenseMotionField {
    let dims = spec.dims;
    let mut field = DenseMotionField::zeros(dims);
    for blob in &spec.blobs {
        let (a, b) = (blob.path[t - 1], blob.path[t]);
        let v = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        if v == [0.0; 3] {
            continue;
        }
        let m = [-v[0], -v[1], -v[2]];
        if spec.motion_cube == 0 {
            let (x0, x1) = span(b[0], blob.radius, dims.nx);
            let (y0, y1) = span(b[1], blob.radius, dims.ny);
            let (z0, z1) = span(b[2], blob.radius, dims.nz);
            let r2 = blob.radius * blob.radius;
            for z in z0..=z1 {
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        let d = [x as f32 - b[0], y as f32 - b[1], z as f32 - b[2]];
                        if d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= r2 {
                            field.set(x, y, z, m);
                        }
                    }
                }
            }
            continue;
        }
        let k = spec.motion_cube;
        let n = dims.as_array();
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for ax in 0..3 {
            let (l0, h0) = span(a[ax], blob.radius, n[ax]);
            let (l1, h1) = span(b[ax], blob.radius, n[ax]);
            lo[ax] = l0.min(l1) / k * k;
            hi[ax] = ((h0.max(h1) / k + 1) * k).min(n[ax]);
        }
        for z in lo[2]..hi[2] {
            for y in lo[1]..hi[1] {
                for x in lo[0]..hi[0] {
                    field.set(x, y, z, m);
                }
            }
        }
    }
    field
}

/// Rasterizes every frame and its motion. A pure function of the spec.
pub fn generate_sequence(spec: &SceneSpec) -> Result<SyntheticSequence> {
    spec.validate()?;
    let grids = (0..spec.frames)
        .into_par_iter()
        .map(|t| rasterize(spec, t))
        .collect::<Result<Vec<_>>>()?;
    let motions = (1..spec.frames)
        .into_par_iter()
        .map(|t| motion_field(spec, t))
        .collect();
    Ok(SyntheticSequence {
        grids,
        motions,
        spec: spec.clone(),
    })
}
