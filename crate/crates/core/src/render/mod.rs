//! CPU volume renderer. Rays are marched with uniform steps, raw features
//! are trilinearly interpolated and the density is activated afterwards,
//! then emission-absorption compositing accumulates color over a
//! background.

mod camera;
mod image;
mod mlp;

pub use self::camera::Camera;
pub use self::image::RgbImage;
pub use self::mlp::{
    encode_direction, DecoderMlp, Layer, DIRECTION_DIM, DIRECTION_FREQS, HIDDEN_WIDTH, MLP_MAGIC,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use self::camera::dot;
use self::mlp::sigmoid;
use crate::error::{Error, Result};
use crate::grid::{BBox, FeatureGrid, OutOfBounds};

/// Shift added to raw density before the softplus. Puts an all-zero grid
/// at a density of about 1e-6, i.e. effectively empty space.
pub const DEFAULT_DENSITY_SHIFT: f32 = -13.8155;
/// Samples whose opacity falls below this are skipped.
pub const DEFAULT_ALPHA_THRESHOLD: f32 = 1e-4;
/// Ray marching stops once transmittance drops below this.
const MIN_TRANSMITTANCE: f32 = 1e-4;

/// How interpolated features become color.
#[derive(Debug, Clone, PartialEq)]
pub enum ColorDecoder {
    /// Sigmoid of feature channels 1..=3.
    Direct,
    Mlp(DecoderMlp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub samples: usize,
    pub near: f32,
    pub far: f32,
    pub background: [f32; 3],
    pub density_shift: f32,
    pub alpha_threshold: f32,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            samples: 256,
            near: 0.0,
            far: 4.0,
            background: [1.0, 1.0, 1.0],
            density_shift: DEFAULT_DENSITY_SHIFT,
            alpha_threshold: DEFAULT_ALPHA_THRESHOLD,
        }
    }
}

impl RenderConfig {
    /// Near/far bracketing `bbox` as seen from `camera`.
    pub fn fit(bbox: &BBox, camera: &Camera) -> Self {
        let e = bbox.extent();
        let half_diag = 0.5 * dot(e, e).sqrt();
        let d = camera::sub(camera.position, bbox.center());
        let dist = dot(d, d).sqrt();
        RenderConfig {
            near: (dist - half_diag).max(0.0),
            far: dist + half_diag,
            ..RenderConfig::default()
        }
    }

    pub fn step(&self) -> f32 {
        (self.far - self.near) / self.samples as f32
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::invalid("need at least 2 samples per ray"));
        }
        if !(self.near >= 0.0 && self.near < self.far && self.far.is_finite()) {
            return Err(Error::invalid(format!(
                "bad near/far {}..{}",
                self.near, self.far
            )));
        }
        if self.background.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::invalid("background color must lie in [0, 1]"));
        }
        if !self.density_shift.is_finite()
            || self.alpha_threshold.is_nan()
            || self.alpha_threshold < 0.0
        {
            return Err(Error::invalid(
                "density shift and alpha threshold must be finite",
            ));
        }
        Ok(())
    }
}

fn softplus(x: f32) -> f32 {
    if x > 20.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// `softplus(raw + shift)`.
pub fn density_activation(raw: f32, shift: f32) -> f32 {
    softplus(raw + shift)
}

/// Raw value whose activation with `shift` is `sigma` (`sigma > 0`).
pub fn inverse_density_activation(sigma: f32, shift: f32) -> f32 {
    let s = f64::from(sigma);
    let raw = if s > 20.0 { s } else { s.exp_m1().ln() };
    raw as f32 - shift
}

/// Logit, the inverse of the direct-mode sigmoid.
pub fn inverse_color(c: f32) -> f32 {
    (c / (1.0 - c)).ln()
}

/// RGB for one sample. `features` are channels 1.. of the grid.
pub fn decode_color(features: &[f32], dir: [f32; 3], decoder: &ColorDecoder) -> Result<[f32; 3]> {
    match decoder {
        ColorDecoder::Direct => {
            if features.len() < 3 {
                return Err(Error::shape(
                    "direct color needs at least 3 feature channels",
                ));
            }
            Ok([
                sigmoid(features[0]),
                sigmoid(features[1]),
                sigmoid(features[2]),
            ])
        }
        ColorDecoder::Mlp(mlp) => mlp.forward(features, dir),
    }
}

fn check_decoder(grid: &FeatureGrid, decoder: &ColorDecoder) -> Result<()> {
    let features = grid.channels() - 1;
    match decoder {
        ColorDecoder::Direct if features < 3 => Err(Error::shape(
            "direct color needs at least 3 feature channels",
        )),
        ColorDecoder::Mlp(mlp) if mlp.feature_dim() != features => Err(Error::shape(format!(
            "decoder expects {} features, grid has {features}",
            mlp.feature_dim()
        ))),
        _ => Ok(()),
    }
}

/// Parameter interval where the ray `o + t d` is inside `bbox`.
fn ray_box(o: [f32; 3], d: [f32; 3], bbox: &BBox) -> Option<(f32, f32)> {
    let (mut t0, mut t1) = (f32::NEG_INFINITY, f32::INFINITY);
    for a in 0..3 {
        if d[a] == 0.0 {
            if o[a] < bbox.min[a] || o[a] > bbox.max[a] {
                return None;
            }
            continue;
        }
        let (mut lo, mut hi) = ((bbox.min[a] - o[a]) / d[a], (bbox.max[a] - o[a]) / d[a]);
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        t0 = t0.max(lo);
        t1 = t1.min(hi);
    }
    (t0 <= t1).then_some((t0, t1))
}

fn inside(p: [f32; 3], bbox: &BBox) -> bool {
    (0..3).all(|a| p[a] >= bbox.min[a] && p[a] <= bbox.max[a])
}

/// Composites one ray; returns the pixel color.
pub(crate) fn march(
    grid: &FeatureGrid,
    decoder: &ColorDecoder,
    cfg: &RenderConfig,
    origin: [f32; 3],
    dir: [f32; 3],
    buf: &mut [f32],
) -> [f32; 3] {
    let bbox = grid.bbox();
    let mut color = [0.0f32; 3];
    let mut trans = 1.0f32;
    if let Some((t0, t1)) = ray_box(origin, dir, &bbox) {
        let delta = cfg.step();
        // Only samples near the box need the exact inside test.
        let first = (((t0 - cfg.near) / delta - 1.0).floor().max(0.0)) as usize;
        let last = (((t1 - cfg.near) / delta + 1.0).ceil().max(0.0) as usize).min(cfg.samples);
        let dir_enc = match decoder {
            ColorDecoder::Mlp(_) => Some(encode_direction(dir)),
            ColorDecoder::Direct => None,
        };
        for i in first..last {
            let t = cfg.near + (i as f32 + 0.5) * delta;
            let p = [
                origin[0] + t * dir[0],
                origin[1] + t * dir[1],
                origin[2] + t * dir[2],
            ];
            if !inside(p, &bbox) {
                continue;
            }
            grid.sample_into(grid.world_to_grid(p), OutOfBounds::Clamp, buf);
            let sigma = density_activation(buf[0], cfg.density_shift);
            let alpha = 1.0 - (-sigma * delta).exp();
            if alpha < cfg.alpha_threshold {
                continue;
            }
            let c = match (decoder, &dir_enc) {
                (ColorDecoder::Mlp(mlp), Some(enc)) => mlp.forward_unchecked(&buf[1..], enc),
                _ => [sigmoid(buf[1]), sigmoid(buf[2]), sigmoid(buf[3])],
            };
            let w = trans * alpha;
            for k in 0..3 {
                color[k] += w * c[k];
            }
            trans *= 1.0 - alpha;
            if trans < MIN_TRANSMITTANCE {
                break;
            }
        }
    }
    let mut px = [0.0; 3];
    for k in 0..3 {
        px[k] = (color[k] + trans * cfg.background[k]).clamp(0.0, 1.0);
    }
    px
}

/// Renders `grid` from `camera`. Rows are rendered in parallel; the result
/// does not depend on the thread count.
pub fn render_image(
    grid: &FeatureGrid,
    decoder: &ColorDecoder,
    camera: &Camera,
    cfg: &RenderConfig,
) -> Result<RgbImage> {
    cfg.validate()?;
    check_decoder(grid, decoder)?;
    let basis = camera.basis()?;
    let (w, h) = (camera.width, camera.height);
    let mut data = vec![0.0f32; w as usize * h as usize * 3];
    data.par_chunks_mut(w as usize * 3)
        .enumerate()
        .for_each_init(
            || vec![0.0f32; grid.channels()],
            |buf, (y, row)| {
                for x in 0..w {
                    let dir = basis.ray(x, y as u32, w, h);
                    let px = march(grid, decoder, cfg, basis.origin, dir, buf);
                    row[x as usize * 3..x as usize * 3 + 3].copy_from_slice(&px);
                }
            },
        );
    RgbImage::new(w, h, data)
}
