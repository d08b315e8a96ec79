//! End-to-end encoder and decoder.
//!
//! Encoding is closed-loop: every frame is reconstructed on the encoder
//! side with the exact routine the decoder runs, and the next P-frame is
//! predicted from that reconstruction. Decoding a stream therefore
//! reproduces the encoder's reconstructions bit for bit.

mod decode;
mod encode;
mod frame;
mod metrics;
mod report;

pub use self::decode::{decode_frame, Decoder};
pub use self::encode::{encode_at, encode_at_with, encode_sequence, EncodedStream};
pub use self::metrics::{grid_psnr, image_psnr, psnr, PSNR_INF_TEXT};
pub use self::report::{EncodeReport, FrameReport};

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::render::ColorDecoder;

/// Encoder settings shared by every rung of the quality ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodeConfig {
    /// Quantization scale factors, one stream per entry.
    pub s_q: Vec<f32>,
    /// Residual entries below this magnitude are dropped.
    pub tau: f32,
    pub gof_length: u32,
    /// Motion pooling cube edge.
    pub pool_kernel: u32,
    /// PCA rank for P-frame residuals; `None` keeps every channel.
    pub pca_rank: Option<u32>,
    pub frame_rate: f32,
    pub decoder: ColorDecoder,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        EncodeConfig {
            s_q: vec![1.0],
            tau: 0.0,
            gof_length: 20,
            pool_kernel: 8,
            pca_rank: None,
            frame_rate: 30.0,
            decoder: ColorDecoder::Direct,
        }
    }
}

impl EncodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s_q.is_empty() {
            return Err(Error::invalid("quality ladder is empty"));
        }
        if self.s_q.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("every S_q must be positive and finite"));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::invalid(format!(
                "residual threshold {} must be >= 0",
                self.tau
            )));
        }
        if self.gof_length == 0 || self.pool_kernel == 0 || self.pca_rank == Some(0) {
            return Err(Error::invalid(
                "GOF length, pooling kernel and PCA rank must be >= 1",
            ));
        }
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(Error::invalid("frame rate must be positive"));
        }
        Ok(())
    }
}

/// Wall time spent in each decode stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    /// Fetching record bytes from the source.
    #[serde(with = "secs")]
    pub io: Duration,
    /// Record parsing, Huffman/RLE/DPCM decoding and the inverse zigzag.
    #[serde(with = "secs")]
    pub entropy: Duration,
    #[serde(with = "secs")]
    pub dequantize: Duration,
    #[serde(with = "secs")]
    pub idct: Duration,
    /// Untiling, PCA back-projection, warping and residual addition.
    #[serde(with = "secs")]
    pub warp_add: Duration,
}

impl StageTimes {
    pub fn total(&self) -> Duration {
        self.io + self.entropy + self.dequantize + self.idct + self.warp_add
    }

    pub fn add(&mut self, other: &StageTimes) {
        self.io += other.io;
        self.entropy += other.entropy;
        self.dequantize += other.dequantize;
        self.idct += other.idct;
        self.warp_add += other.warp_add;
    }

    /// `(name, duration)` pairs in pipeline order.
    pub fn stages(&self) -> [(&'static str, Duration); 5] {
        [
            ("io", self.io),
            ("entropy", self.entropy),
            ("dequantize", self.dequantize),
            ("idct", self.idct),
            ("warp_add", self.warp_add),
        ]
    }

    /// The stage with the largest share.
    pub fn dominant(&self) -> &'static str {
        self.stages()
            .into_iter()
            .max_by_key(|(_, d)| *d)
            .map(|(n, _)| n)
            .unwrap_or("entropy")
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}
