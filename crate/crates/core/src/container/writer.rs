use std::io::{Seek, SeekFrom, Write};

use super::header::{StreamHeader, INDEX_OFFSET_POS};
use super::index::SeekIndex;
use super::record::{FrameRecord, FrameType};
use crate::error::{Error, Result};

/// Single-pass stream writer: header, frames in order, then the trailer.
pub struct StreamWriter<W: Write + Seek> {
    out: W,
    header: StreamHeader,
    start: u64,
    pos: u64,
    index: SeekIndex,
}

impl<W: Write + Seek> StreamWriter<W> {
    pub fn new(mut out: W, header: StreamHeader) -> Result<Self> {
        header.validate()?;
        let start = out.stream_position()?;
        let bytes = header.to_bytes();
        out.write_all(&bytes)?;
        Ok(StreamWriter {
            out,
            header,
            start,
            pos: bytes.len() as u64,
            index: SeekIndex {
                gof_offsets: Vec::new(),
                frame_offsets: Vec::new(),
            },
        })
    }

    pub fn frames_written(&self) -> usize {
        self.index.frame_offsets.len()
    }

    /// Appends the next frame. Enforces the GOF structure: frame `t` is an
    /// I-frame exactly when it starts a GOF.
    pub fn write_frame(&mut self, record: &FrameRecord) -> Result<usize> {
        let t = self.frames_written();
        if t >= self.header.frame_count as usize {
            return Err(Error::invalid(format!(
                "stream announces {} frames",
                self.header.frame_count
            )));
        }
        if record.index as usize != t {
            return Err(Error::invalid(format!(
                "expected frame {t}, got {}",
                record.index
            )));
        }
        let starts_gof = t.is_multiple_of(self.header.gof_length as usize);
        match (starts_gof, record.frame_type) {
            (true, FrameType::P) => {
                return Err(Error::invalid(format!(
                    "frame {t} starts a GOF and must be an I-frame"
                )))
            }
            (false, FrameType::I) => {
                return Err(Error::invalid(format!(
                    "frame {t} is inside a GOF and must be a P-frame"
                )))
            }
            _ => {}
        }
        if record.mask.voxel_dims() != self.header.dims {
            return Err(Error::shape("frame mask does not tile the stream grid"));
        }
        if let Some(p) = &record.pca {
            if p.channels() != self.header.channels || p.rank() != self.header.pca_rank as usize {
                return Err(Error::shape("PCA basis shape disagrees with the header"));
            }
        }
        let bytes = record.to_bytes()?;
        if starts_gof {
            self.index.gof_offsets.push(self.pos);
        }
        self.index.frame_offsets.push(self.pos);
        self.out.write_all(&bytes)?;
        self.pos += bytes.len() as u64;
        Ok(bytes.len())
    }

    /// Writes the trailer, patches its offset into the header and returns
    /// the underlying writer.
    pub fn finish(mut self) -> Result<W> {
        if self.frames_written() != self.header.frame_count as usize {
            return Err(Error::invalid(format!(
                "wrote {} of {} frames",
                self.frames_written(),
                self.header.frame_count
            )));
        }
        let index_offset = self.pos;
        self.out.write_all(&self.index.to_bytes())?;
        let end = self.out.stream_position()?;
        self.out
            .seek(SeekFrom::Start(self.start + INDEX_OFFSET_POS as u64))?;
        self.out.write_all(&index_offset.to_le_bytes())?;
        self.out.seek(SeekFrom::Start(end))?;
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Serializes a complete stream into memory.
pub fn write_stream(header: &StreamHeader, frames: &[FrameRecord]) -> Result<Vec<u8>> {
    let mut w = StreamWriter::new(std::io::Cursor::new(Vec::new()), header.clone())?;
    for f in frames {
        w.write_frame(f)?;
    }
    Ok(w.finish()?.into_inner())
}
