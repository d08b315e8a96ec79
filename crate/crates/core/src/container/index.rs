use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

pub const INDEX_MAGIC: [u8; 4] = *b"RRFX";

/// `(gof index, offset within the GOF)` of frame `t`.
pub fn gof_of(t: usize, gof_length: usize) -> (usize, usize) {
    (t / gof_length, t % gof_length)
}

/// Byte offsets of every GOF and frame record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeekIndex {
    pub gof_offsets: Vec<u64>,
    pub frame_offsets: Vec<u64>,
}

impl SeekIndex {
    pub fn validate(&self, gof_length: usize) -> Result<()> {
        let strictly_increasing = |v: &[u64]| v.windows(2).all(|w| w[0] < w[1]);
        if !strictly_increasing(&self.gof_offsets) || !strictly_increasing(&self.frame_offsets) {
            return Err(Error::corrupt("seek index offsets are not increasing"));
        }
        if self.frame_offsets.len().div_ceil(gof_length) != self.gof_offsets.len() {
            return Err(Error::corrupt(
                "seek index GOF count disagrees with frame count",
            ));
        }
        for (g, off) in self.gof_offsets.iter().enumerate() {
            if self.frame_offsets[g * gof_length] != *off {
                return Err(Error::corrupt(format!(
                    "GOF {g} does not start at an I-frame record"
                )));
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out =
            Vec::with_capacity(12 + 8 * (self.gof_offsets.len() + self.frame_offsets.len()));
        out.extend_from_slice(&INDEX_MAGIC);
        out.write_u32::<LittleEndian>(self.gof_offsets.len() as u32)
            .unwrap();
        for o in &self.gof_offsets {
            out.write_u64::<LittleEndian>(*o).unwrap();
        }
        out.write_u32::<LittleEndian>(self.frame_offsets.len() as u32)
            .unwrap();
        for o in &self.frame_offsets {
            out.write_u64::<LittleEndian>(*o).unwrap();
        }
        out
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        let t = |e| Error::from_read(e, "seek index");
        let mut magic = [0u8; 4];
        std::io::Read::read_exact(&mut bytes, &mut magic).map_err(t)?;
        if magic != INDEX_MAGIC {
            return Err(Error::BadMagic {
                expected: INDEX_MAGIC,
                found: magic,
            });
        }
        let read_list = |bytes: &mut &[u8]| -> Result<Vec<u64>> {
            let n = bytes.read_u32::<LittleEndian>().map_err(t)? as usize;
            if bytes.len() < n * 8 {
                return Err(Error::Truncated("seek index".into()));
            }
            (0..n)
                .map(|_| bytes.read_u64::<LittleEndian>().map_err(t))
                .collect()
        };
        let gof_offsets = read_list(&mut bytes)?;
        let frame_offsets = read_list(&mut bytes)?;
        Ok(SeekIndex {
            gof_offsets,
            frame_offsets,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gof_arithmetic() {
        assert_eq!(gof_of(0, 20), (0, 0));
        assert_eq!(gof_of(20, 20), (1, 0));
        assert_eq!(gof_of(37, 20), (1, 17));
        assert_eq!(gof_of(5, 1), (5, 0));
    }

    #[test]
    fn round_trip_and_validation() {
        let idx = SeekIndex {
            gof_offsets: vec![100, 400],
            frame_offsets: vec![100, 200, 400],
        };
        assert!(idx.validate(2).is_ok());
        assert_eq!(SeekIndex::from_bytes(&idx.to_bytes()).unwrap(), idx);
        assert!(idx.validate(3).is_err());
        let bad = SeekIndex {
            gof_offsets: vec![100, 100],
            frame_offsets: vec![100, 100, 400],
        };
        assert!(bad.validate(2).is_err());
        let bytes = idx.to_bytes();
        assert!(SeekIndex::from_bytes(&bytes[..bytes.len() - 3]).is_err());
    }
}
