use std::ops::Range;

use super::header::StreamHeader;
use super::index::{gof_of, SeekIndex};
use super::record::{FrameRecord, FrameType};
use super::source::ByteSource;
use crate::error::{Error, Result};

/// Random-access reader. Opening reads the header and the trailer only;
/// each frame record is fetched on demand.
#[derive(Debug)]
pub struct StreamReader<S> {
    source: S,
    header: StreamHeader,
    header_len: u64,
    index: SeekIndex,
}

impl<S: ByteSource> StreamReader<S> {
    pub fn open(source: S) -> Result<Self> {
        let prefix = source.read_range(0..12.min(source.len()))?;
        let header_len = StreamHeader::peek_len(&prefix)? as u64;
        let header =
            StreamHeader::from_bytes(&source.read_range(0..header_len.min(source.len()))?)?;
        if header.index_offset < header_len || header.index_offset > source.len() {
            return Err(Error::corrupt(format!(
                "seek index offset {} outside stream of {} bytes",
                header.index_offset,
                source.len()
            )));
        }
        let index = SeekIndex::from_bytes(&source.read_range(header.index_offset..source.len())?)?;
        index.validate(header.gof_length as usize)?;
        if index.frame_offsets.len() != header.frame_count as usize {
            return Err(Error::corrupt(format!(
                "header announces {} frames, index lists {}",
                header.frame_count,
                index.frame_offsets.len()
            )));
        }
        if index
            .frame_offsets
            .first()
            .is_some_and(|o| *o != header_len)
            || index
                .frame_offsets
                .last()
                .is_some_and(|o| *o >= header.index_offset)
        {
            return Err(Error::corrupt("frame offsets fall outside the record area"));
        }
        Ok(StreamReader {
            source,
            header,
            header_len,
            index,
        })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    pub fn index(&self) -> &SeekIndex {
        &self.index
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn frame_count(&self) -> usize {
        self.index.frame_offsets.len()
    }

    pub fn gof_count(&self) -> usize {
        self.index.gof_offsets.len()
    }

    pub fn header_range(&self) -> Range<u64> {
        0..self.header_len
    }

    pub fn trailer_range(&self) -> Range<u64> {
        self.header.index_offset..self.source.len()
    }

    /// Byte range of frame `t`'s record.
    pub fn frame_range(&self, t: usize) -> Result<Range<u64>> {
        let n = self.frame_count();
        if t >= n {
            return Err(Error::OutOfRange { index: t, len: n });
        }
        let end = self
            .index
            .frame_offsets
            .get(t + 1)
            .copied()
            .unwrap_or(self.header.index_offset);
        Ok(self.index.frame_offsets[t]..end)
    }

    /// Byte range holding every frame record of GOF `g`.
    pub fn gof_range(&self, g: usize) -> Result<Range<u64>> {
        let n = self.gof_count();
        if g >= n {
            return Err(Error::OutOfRange { index: g, len: n });
        }
        let end = self
            .index
            .gof_offsets
            .get(g + 1)
            .copied()
            .unwrap_or(self.header.index_offset);
        Ok(self.index.gof_offsets[g]..end)
    }

    /// First frame of the GOF containing `t`.
    pub fn gof_start(&self, t: usize) -> usize {
        let gof = self.header.gof_length as usize;
        gof_of(t, gof).0 * gof
    }

    pub fn read_frame_record(&self, t: usize) -> Result<FrameRecord> {
        let range = self.frame_range(t)?;
        let bytes = self.source.read_range(range)?;
        let rec = FrameRecord::from_bytes(&bytes, self.header.dims)?;
        if rec.index as usize != t {
            return Err(Error::corrupt(format!(
                "record at slot {t} claims frame {}",
                rec.index
            )));
        }
        let expect = if t == self.gof_start(t) {
            FrameType::I
        } else {
            FrameType::P
        };
        if rec.frame_type != expect {
            return Err(Error::corrupt(format!(
                "frame {t} is {} but the GOF structure requires {expect}",
                rec.frame_type
            )));
        }
        Ok(rec)
    }
}

pub fn read_header(bytes: &[u8]) -> Result<StreamHeader> {
    StreamHeader::from_bytes(bytes)
}

pub fn read_frame_record(bytes: &[u8], t: usize) -> Result<FrameRecord> {
    StreamReader::open(bytes)?.read_frame_record(t)
}
