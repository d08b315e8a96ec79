use std::fmt::Write as _;

use serde::Serialize;

use crate::container::{ByteSource, FrameSizes, FrameType, StreamHeader, StreamReader};
use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct FrameReport {
    pub index: usize,
    pub frame_type: FrameType,
    pub sizes: FrameSizes,
}

/// Per-frame byte accounting of one encoded stream.
#[derive(Debug, Clone, Serialize)]
pub struct EncodeReport {
    pub s_q: f32,
    pub gof_length: u32,
    pub dims: [usize; 3],
    pub channels: usize,
    /// Size of the input as raw `f32` grids.
    pub raw_bytes: usize,
    pub stream_bytes: usize,
    pub header_bytes: usize,
    pub index_bytes: usize,
    pub frames: Vec<FrameReport>,
}

impl EncodeReport {
    pub(crate) fn new(
        header: &StreamHeader,
        frames: Vec<FrameReport>,
        stream_bytes: usize,
        header_bytes: usize,
    ) -> Self {
        let records: usize = frames.iter().map(|f| f.sizes.total()).sum();
        EncodeReport {
            s_q: header.quant.scale(),
            gof_length: header.gof_length,
            dims: header.dims.as_array(),
            channels: header.channels,
            raw_bytes: header.dims.count() * header.channels * 4 * frames.len(),
            stream_bytes,
            header_bytes,
            index_bytes: stream_bytes - header_bytes - records,
            frames,
        }
    }

    /// Rebuilds the report of an existing stream by parsing every record.
    pub fn from_reader<S: ByteSource>(reader: &StreamReader<S>) -> Result<Self> {
        let frames = (0..reader.frame_count())
            .map(|t| {
                let rec = reader.read_frame_record(t)?;
                Ok(FrameReport {
                    index: t,
                    frame_type: rec.frame_type,
                    sizes: rec.sizes(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let h = reader.header_range();
        Ok(Self::new(
            reader.header(),
            frames,
            reader.source().len() as usize,
            (h.end - h.start) as usize,
        ))
    }

    pub fn compression_ratio(&self) -> f64 {
        self.raw_bytes as f64 / self.stream_bytes as f64
    }

    /// Mean record size over frames of type `ty`, or `None` if there are none.
    pub fn mean_frame_bytes(&self, ty: FrameType) -> Option<f64> {
        let sizes: Vec<usize> = self
            .frames
            .iter()
            .filter(|f| f.frame_type == ty)
            .map(|f| f.sizes.total())
            .collect();
        (!sizes.is_empty()).then(|| sizes.iter().sum::<usize>() as f64 / sizes.len() as f64)
    }

    /// Sum of every frame's sizes, by category.
    pub fn totals(&self) -> FrameSizes {
        let mut t = FrameSizes::default();
        for f in &self.frames {
            t.add(&f.sizes);
        }
        t
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let [nx, ny, nz] = self.dims;
        let _ = writeln!(
            s,
            "S_q {}  frames {}  GOF {}  grid {nx}x{ny}x{nz}x{}",
            self.s_q,
            self.frames.len(),
            self.gof_length,
            self.channels
        );
        let _ = writeln!(
            s,
            "raw {} B  stream {} B  ratio {:.1}x  (header {} B, index {} B)",
            self.raw_bytes,
            self.stream_bytes,
            self.compression_ratio(),
            self.header_bytes,
            self.index_bytes
        );
        let _ = writeln!(
            s,
            "{:>6} {:>4} {:>10} {:>8} {:>6} {:>6} {:>10}",
            "frame", "type", "residual", "motion", "pca", "other", "total"
        );
        for f in &self.frames {
            let z = &f.sizes;
            let _ = writeln!(
                s,
                "{:>6} {:>4} {:>10} {:>8} {:>6} {:>6} {:>10}",
                f.index,
                f.frame_type,
                z.coefficients,
                z.motion,
                z.pca,
                z.other,
                z.total()
            );
        }
        let n = self.frames.len().max(1) as f64;
        let t = self.totals();
        let _ = writeln!(
            s,
            "{:>6} {:>4} {:>10.1} {:>8.1} {:>6.1} {:>6.1} {:>10.1}",
            "mean",
            "",
            t.coefficients as f64 / n,
            t.motion as f64 / n,
            t.pca as f64 / n,
            t.other as f64 / n,
            t.total() as f64 / n
        );
        for ty in [FrameType::I, FrameType::P] {
            if let Some(m) = self.mean_frame_bytes(ty) {
                let _ = writeln!(s, "mean {ty}-frame {m:.1} B");
            }
        }
        s
    }
}
