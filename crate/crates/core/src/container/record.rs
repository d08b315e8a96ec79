use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Dims, OccupancyMask};
use crate::transform::{PcaBasis, CUBE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrameType {
    /// Intra-coded: the full feature grid, independent of other frames.
    I,
    /// Predicted: motion grid plus PCA-projected residual.
    P,
}

impl FrameType {
    fn tag(self) -> u8 {
        match self {
            FrameType::I => 0,
            FrameType::P => 1,
        }
    }
}

impl std::fmt::Display for FrameType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FrameType::I => "I",
            FrameType::P => "P",
        })
    }
}

/// One coded frame as stored in the stream.
///
/// Body layout after the `u32` body length: `u8` type, `u32` frame index,
/// `u32` mask length + mask bits; for P-frames `u16 n, u16 q` + `n x q`
/// `f32` basis and `u32` motion length + motion payload; then `u32`
/// coefficient length + coefficient payload.
///
/// A frame with no occupied cube stores a zero-length mask, and a P-frame
/// of that kind stores `n = q = 0` in place of its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_type: FrameType,
    pub index: u32,
    pub mask: OccupancyMask,
    pub pca: Option<PcaBasis>,
    pub motion: Option<Vec<u8>>,
    pub coefficients: Vec<u8>,
}

/// Per-frame byte accounting by payload category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FrameSizes {
    /// Entropy-coded transform coefficients (the residual for P-frames).
    pub coefficients: usize,
    pub motion: usize,
    pub pca: usize,
    /// Occupancy mask and record framing.
    pub other: usize,
}

impl FrameSizes {
    pub fn total(&self) -> usize {
        self.coefficients + self.motion + self.pca + self.other
    }

    pub fn add(&mut self, other: &FrameSizes) {
        self.coefficients += other.coefficients;
        self.motion += other.motion;
        self.pca += other.pca;
        self.other += other.other;
    }
}

impl FrameRecord {
    pub fn validate(&self) -> Result<()> {
        match self.frame_type {
            FrameType::I if self.pca.is_some() || self.motion.is_some() => Err(Error::invalid(
                "I-frame records carry no PCA basis or motion",
            )),
            FrameType::P if self.motion.is_none() => {
                Err(Error::invalid("P-frame records need motion"))
            }
            FrameType::P if self.pca.is_none() && self.mask.occupied_count() > 0 => Err(
                Error::invalid("P-frame records with coded cubes need a PCA basis"),
            ),
            _ => Ok(()),
        }
    }

    pub fn sizes(&self) -> FrameSizes {
        let pca = self.pca.as_ref().map_or(0, |p| p.matrix().len() * 4);
        let motion = self.motion.as_ref().map_or(0, Vec::len);
        let coefficients = self.coefficients.len();
        let total = self.encoded_len();
        FrameSizes {
            coefficients,
            motion,
            pca,
            other: total - coefficients - motion - pca,
        }
    }

    fn mask_bytes(&self) -> Vec<u8> {
        if self.mask.occupied_count() == 0 {
            Vec::new()
        } else {
            self.mask.to_bytes()
        }
    }

    /// Serialized length including the leading body-length field.
    pub fn encoded_len(&self) -> usize {
        let mut n = 4 + 1 + 4 + 4 + self.mask_bytes().len() + 4 + self.coefficients.len();
        if let Some(m) = &self.motion {
            n += 4 + self.pca.as_ref().map_or(0, |p| p.matrix().len() * 4) + 4 + m.len();
        }
        n
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let mut body = Vec::with_capacity(self.encoded_len());
        body.write_u32::<LittleEndian>(0)?;
        body.push(self.frame_type.tag());
        body.write_u32::<LittleEndian>(self.index)?;
        let mask = self.mask_bytes();
        body.write_u32::<LittleEndian>(mask.len() as u32)?;
        body.extend_from_slice(&mask);
        if let Some(m) = &self.motion {
            match &self.pca {
                Some(p) => {
                    body.write_u16::<LittleEndian>(p.channels() as u16)?;
                    body.write_u16::<LittleEndian>(p.rank() as u16)?;
                    for v in p.matrix() {
                        body.write_f32::<LittleEndian>(*v)?;
                    }
                }
                None => body.write_u32::<LittleEndian>(0)?,
            }
            body.write_u32::<LittleEndian>(m.len() as u32)?;
            body.extend_from_slice(m);
        }
        body.write_u32::<LittleEndian>(self.coefficients.len() as u32)?;
        body.extend_from_slice(&self.coefficients);
        let len = (body.len() - 4) as u32;
        body[..4].copy_from_slice(&len.to_le_bytes());
        Ok(body)
    }

    /// Parses one record (including its length prefix) for a grid of `dims`.
    pub fn from_bytes(bytes: &[u8], dims: Dims) -> Result<Self> {
        let t = |e| Error::from_read(e, "frame record");
        let mut r = bytes;
        let len = r.read_u32::<LittleEndian>().map_err(t)? as usize;
        if r.len() < len {
            return Err(Error::Truncated("frame record".into()));
        }
        if r.len() > len {
            return Err(Error::corrupt("frame record longer than its length field"));
        }
        let frame_type = match r.read_u8().map_err(t)? {
            0 => FrameType::I,
            1 => FrameType::P,
            x => return Err(Error::corrupt(format!("unknown frame type {x}"))),
        };
        let index = r.read_u32::<LittleEndian>().map_err(t)?;
        let take = |r: &mut &[u8], what: &str| -> Result<Vec<u8>> {
            let n = r.read_u32::<LittleEndian>().map_err(t)? as usize;
            if r.len() < n {
                return Err(Error::Truncated(what.into()));
            }
            let (a, b) = r.split_at(n);
            *r = b;
            Ok(a.to_vec())
        };
        let mask_bytes = take(&mut r, "occupancy mask")?;
        let mask = if mask_bytes.is_empty() {
            OccupancyMask::empty(dims, CUBE)?
        } else {
            OccupancyMask::from_bytes(dims, CUBE, &mask_bytes)?
        };
        let (pca, motion) = if frame_type == FrameType::P {
            let n = usize::from(r.read_u16::<LittleEndian>().map_err(t)?);
            let q = usize::from(r.read_u16::<LittleEndian>().map_err(t)?);
            let basis = if n == 0 && q == 0 {
                None
            } else {
                let mut v = vec![0f32; n * q];
                r.read_f32_into::<LittleEndian>(&mut v).map_err(t)?;
                Some(PcaBasis::from_matrix(n, q, v)?)
            };
            (basis, Some(take(&mut r, "motion payload")?))
        } else {
            (None, None)
        };
        let coefficients = take(&mut r, "coefficient payload")?;
        if !r.is_empty() {
            return Err(Error::corrupt("unparsed bytes at end of frame record"));
        }
        let record = FrameRecord {
            frame_type,
            index,
            mask,
            pca,
            motion,
            coefficients,
        };
        record
            .validate()
            .map_err(|e| Error::corrupt(e.to_string()))?;
        Ok(record)
    }
}
