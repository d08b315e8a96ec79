use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::grid::{BBox, Dims};
use crate::render::{ColorDecoder, DecoderMlp};
use crate::transform::{QuantizationSpec, CUBE_LEN};

pub const STREAM_MAGIC: [u8; 4] = *b"RRFV";
/// Version 1 pins the (u+v+w, u, v, w) zigzag order, one's-complement
/// amplitudes and per-frame DC/AC Huffman tables.
pub const STREAM_VERSION: u32 = 1;

/// Byte position of the `index_offset` field inside the header.
pub(crate) const INDEX_OFFSET_POS: usize = 4 + 4 + 4 + 16 + 24 + 12 + 1 + 4 + 4 * CUBE_LEN + 4 + 4;

const FLAG_IFRAME_PCA: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct StreamHeader {
    pub dims: Dims,
    pub channels: usize,
    pub bbox: BBox,
    pub gof_length: u32,
    pub pool_kernel: u32,
    /// Number of principal directions kept for P-frame residuals.
    pub pca_rank: u32,
    /// Whether I-frames are PCA-projected too (always false for streams
    /// written by this crate).
    pub iframe_pca: bool,
    pub quant: QuantizationSpec,
    pub frame_rate: f32,
    pub frame_count: u32,
    pub decoder: ColorDecoder,
    /// Offset of the seek index trailer; filled in by the writer.
    pub index_offset: u64,
}

impl StreamHeader {
    pub fn validate(&self) -> Result<()> {
        if self.gof_length == 0 {
            return Err(Error::invalid("GOF length must be >= 1"));
        }
        if self.pool_kernel == 0 {
            return Err(Error::invalid("pooling kernel must be >= 1"));
        }
        if self.channels < 2 || self.dims.count() == 0 {
            return Err(Error::invalid("stream grid shape is degenerate"));
        }
        if self.pca_rank == 0 || self.pca_rank as usize > self.channels {
            return Err(Error::invalid(format!(
                "PCA rank {} invalid for {} channels",
                self.pca_rank, self.channels
            )));
        }
        if self.frame_rate.is_nan() || self.frame_rate <= 0.0 {
            return Err(Error::invalid("frame rate must be > 0"));
        }
        if let ColorDecoder::Mlp(mlp) = &self.decoder {
            if mlp.feature_dim() != self.channels - 1 {
                return Err(Error::shape(format!(
                    "decoder expects {} features, grid has {}",
                    mlp.feature_dim(),
                    self.channels - 1
                )));
            }
        }
        Ok(())
    }

    pub fn gof_count(&self) -> usize {
        (self.frame_count as usize).div_ceil(self.gof_length as usize)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&STREAM_MAGIC);
        out.write_u32::<LittleEndian>(STREAM_VERSION).unwrap();
        out.write_u32::<LittleEndian>(0).unwrap(); // header length, patched below
        for n in [self.dims.nx, self.dims.ny, self.dims.nz, self.channels] {
            out.write_u32::<LittleEndian>(n as u32).unwrap();
        }
        for v in self.bbox.min.iter().chain(&self.bbox.max) {
            out.write_f32::<LittleEndian>(*v).unwrap();
        }
        out.write_u32::<LittleEndian>(self.gof_length).unwrap();
        out.write_u32::<LittleEndian>(self.pool_kernel).unwrap();
        out.write_u32::<LittleEndian>(self.pca_rank).unwrap();
        out.push(if self.iframe_pca { FLAG_IFRAME_PCA } else { 0 });
        out.write_f32::<LittleEndian>(self.quant.scale()).unwrap();
        for q in self.quant.matrix() {
            out.write_f32::<LittleEndian>(*q).unwrap();
        }
        out.write_f32::<LittleEndian>(self.frame_rate).unwrap();
        out.write_u32::<LittleEndian>(self.frame_count).unwrap();
        debug_assert_eq!(out.len(), INDEX_OFFSET_POS);
        out.write_u64::<LittleEndian>(self.index_offset).unwrap();
        match &self.decoder {
            ColorDecoder::Direct => {
                out.push(0);
                out.write_u32::<LittleEndian>(0).unwrap();
            }
            ColorDecoder::Mlp(mlp) => {
                let blob = mlp.to_bytes();
                out.push(1);
                out.write_u32::<LittleEndian>(blob.len() as u32).unwrap();
                out.extend_from_slice(&blob);
            }
        }
        let len = out.len() as u32;
        out[8..12].copy_from_slice(&len.to_le_bytes());
        out
    }

    /// Length of the serialized header given its first 12 bytes.
    pub(crate) fn peek_len(prefix: &[u8]) -> Result<usize> {
        if prefix.len() < 12 {
            return Err(Error::Truncated("stream header".into()));
        }
        let magic: [u8; 4] = prefix[..4].try_into().unwrap();
        if magic != STREAM_MAGIC {
            return Err(Error::BadMagic {
                expected: STREAM_MAGIC,
                found: magic,
            });
        }
        let version = u32::from_le_bytes(prefix[4..8].try_into().unwrap());
        if version != STREAM_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let len = u32::from_le_bytes(prefix[8..12].try_into().unwrap()) as usize;
        if len < INDEX_OFFSET_POS + 13 {
            return Err(Error::corrupt(format!("header length {len} too small")));
        }
        Ok(len)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let len = Self::peek_len(bytes)?;
        if bytes.len() < len {
            return Err(Error::Truncated("stream header".into()));
        }
        let mut r = &bytes[12..len];
        let t = |e| Error::from_read(e, "stream header");
        let mut u32s = [0u32; 4];
        for v in &mut u32s {
            *v = r.read_u32::<LittleEndian>().map_err(t)?;
        }
        let mut b = [0f32; 6];
        for v in &mut b {
            *v = r.read_f32::<LittleEndian>().map_err(t)?;
        }
        let gof_length = r.read_u32::<LittleEndian>().map_err(t)?;
        let pool_kernel = r.read_u32::<LittleEndian>().map_err(t)?;
        let pca_rank = r.read_u32::<LittleEndian>().map_err(t)?;
        let flags = r.read_u8().map_err(t)?;
        let scale = r.read_f32::<LittleEndian>().map_err(t)?;
        let mut matrix = [0f32; CUBE_LEN];
        r.read_f32_into::<LittleEndian>(&mut matrix).map_err(t)?;
        let frame_rate = r.read_f32::<LittleEndian>().map_err(t)?;
        let frame_count = r.read_u32::<LittleEndian>().map_err(t)?;
        let index_offset = r.read_u64::<LittleEndian>().map_err(t)?;
        let mode = r.read_u8().map_err(t)?;
        let blob_len = r.read_u32::<LittleEndian>().map_err(t)? as usize;
        if r.len() != blob_len {
            return Err(Error::corrupt(
                "decoder descriptor length disagrees with header length",
            ));
        }
        let decoder = match mode {
            0 => ColorDecoder::Direct,
            1 => ColorDecoder::Mlp(DecoderMlp::from_bytes(r)?),
            m => return Err(Error::corrupt(format!("unknown decoder mode {m}"))),
        };
        let header = StreamHeader {
            dims: Dims::new(u32s[0] as usize, u32s[1] as usize, u32s[2] as usize),
            channels: u32s[3] as usize,
            bbox: BBox::new([b[0], b[1], b[2]], [b[3], b[4], b[5]]),
            gof_length,
            pool_kernel,
            pca_rank,
            iframe_pca: flags & FLAG_IFRAME_PCA != 0,
            quant: QuantizationSpec::new(scale, matrix)
                .map_err(|e| Error::corrupt(format!("quantizer: {e}")))?,
            frame_rate,
            frame_count,
            decoder,
            index_offset,
        };
        header
            .validate()
            .map_err(|e| Error::corrupt(format!("header: {e}")))?;
        Ok(header)
    }
}
