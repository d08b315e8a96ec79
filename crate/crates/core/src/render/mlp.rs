use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MLP_MAGIC: [u8; 4] = *b"RRFD";
const MLP_VERSION: u32 = 1;

pub const HIDDEN_WIDTH: usize = 128;
/// Frequencies of the sin/cos view-direction encoding.
pub const DIRECTION_FREQS: usize = 4;
/// Raw direction plus sin and cos at each frequency.
pub const DIRECTION_DIM: usize = 3 + 6 * DIRECTION_FREQS;

/// `[d, sin(d), cos(d), sin(2d), cos(2d), ...]`, component-wise.
pub fn encode_direction(d: [f32; 3]) -> [f32; DIRECTION_DIM] {
    let mut out = [0.0; DIRECTION_DIM];
    out[..3].copy_from_slice(&d);
    for k in 0..DIRECTION_FREQS {
        let f = (1u32 << k) as f32;
        for a in 0..3 {
            out[3 + 6 * k + a] = (f * d[a]).sin();
            out[6 + 6 * k + a] = (f * d[a]).cos();
        }
    }
    out
}

/// Fully connected layer, weights row-major `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub outputs: usize,
    pub inputs: usize,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

/// Feature-to-color decoder: (features, encoded direction) -> 128 -> 128 -> RGB,
/// ReLU hidden activations and a sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderMlp {
    layers: Vec<Layer>,
}

pub(crate) fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

impl DecoderMlp {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.len() != 3 {
            return Err(Error::shape(format!(
                "decoder needs 3 layers, got {}",
                layers.len()
            )));
        }
        let input = layers[0].inputs;
        if input <= DIRECTION_DIM {
            return Err(Error::shape(format!(
                "decoder input width {input} leaves no features"
            )));
        }
        let expect = [
            (HIDDEN_WIDTH, input),
            (HIDDEN_WIDTH, HIDDEN_WIDTH),
            (3, HIDDEN_WIDTH),
        ];
        for (l, (o, i)) in layers.iter().zip(expect) {
            if (l.outputs, l.inputs) != (o, i) || l.weights.len() != o * i || l.bias.len() != o {
                return Err(Error::shape(format!(
                    "decoder layer is {}x{} with {} weights, expected {o}x{i}",
                    l.outputs,
                    l.inputs,
                    l.weights.len()
                )));
            }
            if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(Error::invalid("non-finite decoder weight"));
            }
        }
        Ok(DecoderMlp { layers })
    }

    /// All weights and biases zero.
    pub fn zeros(feature_dim: usize) -> Self {
        Self::build(feature_dim, |_, _| 0.0)
    }

    /// Xavier-uniform weights and small biases drawn from a seeded generator.
    pub fn seeded(feature_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::build(feature_dim, move |fan_in, fan_out| {
            let a = (6.0 / (fan_in + fan_out) as f32).sqrt();
            rng.random_range(-a..a)
        })
    }

    fn build(feature_dim: usize, mut draw: impl FnMut(usize, usize) -> f32) -> Self {
        let sizes = [feature_dim + DIRECTION_DIM, HIDDEN_WIDTH, HIDDEN_WIDTH, 3];
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (i, o) = (w[0], w[1]);
                Layer {
                    outputs: o,
                    inputs: i,
                    weights: (0..o * i).map(|_| draw(i, o)).collect(),
                    bias: (0..o).map(|_| 0.1 * draw(i, o)).collect(),
                }
            })
            .collect();
        DecoderMlp { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn feature_dim(&self) -> usize {
        self.layers[0].inputs - DIRECTION_DIM
    }

    /// Forward pass. `features.len()` must equal [`Self::feature_dim`].
    pub fn forward(&self, features: &[f32], dir: [f32; 3]) -> Result<[f32; 3]> {
        if features.len() != self.feature_dim() {
            return Err(Error::shape(format!(
                "decoder expects {} features, got {}",
                self.feature_dim(),
                features.len()
            )));
        }
        Ok(self.forward_unchecked(features, &encode_direction(dir)))
    }

    pub(crate) fn forward_unchecked(
        &self,
        features: &[f32],
        dir_enc: &[f32; DIRECTION_DIM],
    ) -> [f32; 3] {
        let mut input = [0.0f32; 64 + DIRECTION_DIM];
        let mut heap;
        let x: &mut [f32] = if features.len() <= 64 {
            &mut input[..features.len() + DIRECTION_DIM]
        } else {
            heap = vec![0.0; features.len() + DIRECTION_DIM];
            &mut heap
        };
        x[..features.len()].copy_from_slice(features);
        x[features.len()..].copy_from_slice(dir_enc);
        let mut h1 = [0.0f32; HIDDEN_WIDTH];
        let mut h2 = [0.0f32; HIDDEN_WIDTH];
        dense(&self.layers[0], x, &mut h1, true);
        dense(&self.layers[1], &h1, &mut h2, true);
        let mut out = [0.0f32; 3];
        dense(&self.layers[2], &h2, &mut out, false);
        out.map(sigmoid)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MLP_MAGIC);
        out.write_u32::<LittleEndian>(MLP_VERSION).unwrap();
        out.write_u32::<LittleEndian>(self.layers.len() as u32)
            .unwrap();
        for l in &self.layers {
            out.write_u32::<LittleEndian>(l.outputs as u32).unwrap();
            out.write_u32::<LittleEndian>(l.inputs as u32).unwrap();
            for v in l.weights.iter().chain(&l.bias) {
                out.write_f32::<LittleEndian>(*v).unwrap();
            }
        }
        out
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        let t = |e| Error::from_read(e, "decoder weights");
        let mut magic = [0u8; 4];
        std::io::Read::read_exact(&mut bytes, &mut magic).map_err(t)?;
        if magic != MLP_MAGIC {
            return Err(Error::BadMagic {
                expected: MLP_MAGIC,
                found: magic,
            });
        }
        let version = bytes.read_u32::<LittleEndian>().map_err(t)?;
        if version != MLP_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let n = bytes.read_u32::<LittleEndian>().map_err(t)? as usize;
        if n != 3 {
            return Err(Error::corrupt(format!("decoder with {n} layers")));
        }
        let mut layers = Vec::with_capacity(n);
        for _ in 0..n {
            let outputs = bytes.read_u32::<LittleEndian>().map_err(t)? as usize;
            let inputs = bytes.read_u32::<LittleEndian>().map_err(t)? as usize;
            if outputs > 4096 || inputs > 4096 {
                return Err(Error::corrupt("decoder layer too large"));
            }
            let mut weights = vec![0.0; outputs * inputs];
            bytes
                .read_f32_into::<LittleEndian>(&mut weights)
                .map_err(t)?;
            let mut bias = vec![0.0; outputs];
            bytes.read_f32_into::<LittleEndian>(&mut bias).map_err(t)?;
            layers.push(Layer {
                outputs,
                inputs,
                weights,
                bias,
            });
        }
        if !bytes.is_empty() {
            return Err(Error::corrupt("trailing bytes after decoder weights"));
        }
        DecoderMlp::new(layers)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }
}

fn dense(layer: &Layer, x: &[f32], out: &mut [f32], relu: bool) {
    for (o, row) in out.iter_mut().zip(layer.weights.chunks_exact(layer.inputs)) {
        let mut acc = 0.0f32;
        for (w, v) in row.iter().zip(x) {
            acc += w * v;
        }
        *o = acc;
    }
    for (o, b) in out.iter_mut().zip(&layer.bias) {
        *o += b;
        if relu {
            *o = o.max(0.0);
        }
    }
}
