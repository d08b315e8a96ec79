use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One independently coded stream of the quality ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityLevel {
    pub s_q: f32,
    pub avg_kbps: f64,
    /// Stream file, relative to the manifest's directory unless absolute.
    pub path: String,
}

/// Multi-quality listing served to players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub frame_count: u32,
    pub gof_length: u32,
    pub frame_rate: f32,
    pub qualities: Vec<QualityLevel>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let m: Manifest = serde_json::from_str(&text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.qualities.is_empty() {
            return Err(Error::invalid("manifest lists no quality levels"));
        }
        if self.gof_length == 0 || (self.frame_rate.is_nan() || self.frame_rate <= 0.0) {
            return Err(Error::invalid(
                "manifest GOF length and frame rate must be positive",
            ));
        }
        Ok(())
    }

    pub fn gof_count(&self) -> usize {
        (self.frame_count as usize).div_ceil(self.gof_length as usize)
    }

    pub fn stream_path(&self, manifest_dir: &Path, quality: usize) -> Option<PathBuf> {
        let q = self.qualities.get(quality)?;
        let p = Path::new(&q.path);
        Some(if p.is_absolute() {
            p.to_path_buf()
        } else {
            manifest_dir.join(p)
        })
    }

    /// Average bitrate of a stream of `bytes` bytes.
    pub fn kbps(bytes: u64, frame_count: u32, frame_rate: f32) -> f64 {
        let seconds = f64::from(frame_count) / f64::from(frame_rate);
        if seconds == 0.0 {
            0.0
        } else {
            bytes as f64 * 8.0 / seconds / 1000.0
        }
    }
}
