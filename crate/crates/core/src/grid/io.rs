//! Raw grid interchange files.
//!
//! Layout (little-endian): magic, `u32` version, `u32` Nx, Ny, Nz, C,
//! `6 x f32` bbox (min xyz then max xyz), then `f32` payload in x-fastest,
//! y, z, channel-major order. Dense motion fields use the same layout with
//! magic `RRFM` and C = 3.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{BBox, DenseMotionField, Dims, FeatureGrid};
use crate::error::{Error, Result};

pub const GRID_MAGIC: [u8; 4] = *b"RRFG";
pub const MOTION_MAGIC: [u8; 4] = *b"RRFM";
const VERSION: u32 = 1;

struct RawHeader {
    dims: Dims,
    channels: usize,
    bbox: BBox,
}

fn write_header<W: Write>(w: &mut W, magic: [u8; 4], h: &RawHeader) -> Result<()> {
    w.write_all(&magic)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    for n in [h.dims.nx, h.dims.ny, h.dims.nz, h.channels] {
        w.write_u32::<LittleEndian>(n as u32)?;
    }
    for v in h.bbox.min.iter().chain(&h.bbox.max) {
        w.write_f32::<LittleEndian>(*v)?;
    }
    Ok(())
}

fn read_header<R: Read>(r: &mut R, magic: [u8; 4]) -> Result<RawHeader> {
    let mut found = [0u8; 4];
    r.read_exact(&mut found)
        .map_err(|e| Error::from_read(e, "grid header"))?;
    if found != magic {
        return Err(Error::BadMagic {
            expected: magic,
            found,
        });
    }
    let rd = |r: &mut R| {
        r.read_u32::<LittleEndian>()
            .map_err(|e| Error::from_read(e, "grid header"))
    };
    let version = rd(r)?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let nx = rd(r)? as usize;
    let ny = rd(r)? as usize;
    let nz = rd(r)? as usize;
    let channels = rd(r)? as usize;
    let mut b = [0f32; 6];
    for v in &mut b {
        *v = r
            .read_f32::<LittleEndian>()
            .map_err(|e| Error::from_read(e, "grid bbox"))?;
    }
    Ok(RawHeader {
        dims: Dims::new(nx, ny, nz),
        channels,
        bbox: BBox::new([b[0], b[1], b[2]], [b[3], b[4], b[5]]),
    })
}

fn read_payload<R: Read>(r: &mut R, len: usize) -> Result<Vec<f32>> {
    let mut data = vec![0f32; len];
    r.read_f32_into::<LittleEndian>(&mut data)
        .map_err(|e| Error::from_read(e, "grid payload"))?;
    Ok(data)
}

pub fn write_grid<W: Write>(w: &mut W, grid: &FeatureGrid) -> Result<()> {
    write_header(
        w,
        GRID_MAGIC,
        &RawHeader {
            dims: grid.dims(),
            channels: grid.channels(),
            bbox: grid.bbox(),
        },
    )?;
    for v in grid.data() {
        w.write_f32::<LittleEndian>(*v)?;
    }
    Ok(())
}

pub fn read_grid<R: Read>(r: &mut R) -> Result<FeatureGrid> {
    let h = read_header(r, GRID_MAGIC)?;
    let len = h
        .dims
        .count()
        .checked_mul(h.channels)
        .ok_or_else(|| Error::corrupt("grid size overflows"))?;
    let data = read_payload(r, len)?;
    FeatureGrid::from_data(h.dims, h.channels, h.bbox, data)
}

/// Motion files carry a placeholder bbox; motion is in voxel units.
pub fn write_motion<W: Write>(w: &mut W, motion: &DenseMotionField) -> Result<()> {
    write_header(
        w,
        MOTION_MAGIC,
        &RawHeader {
            dims: motion.dims(),
            channels: 3,
            bbox: BBox::new([0.0; 3], [0.0; 3]),
        },
    )?;
    for v in motion.data() {
        w.write_f32::<LittleEndian>(*v)?;
    }
    Ok(())
}

pub fn read_motion<R: Read>(r: &mut R) -> Result<DenseMotionField> {
    let h = read_header(r, MOTION_MAGIC)?;
    if h.channels != 3 {
        return Err(Error::corrupt(format!(
            "motion file has {} channels",
            h.channels
        )));
    }
    let data = read_payload(r, h.dims.count() * 3)?;
    DenseMotionField::from_data(h.dims, data)
}

pub fn write_grid_file(path: impl AsRef<Path>, grid: &FeatureGrid) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_grid(&mut w, grid)?;
    w.flush()?;
    Ok(())
}

pub fn read_grid_file(path: impl AsRef<Path>) -> Result<FeatureGrid> {
    read_grid(&mut BufReader::new(File::open(path)?))
}

pub fn write_motion_file(path: impl AsRef<Path>, motion: &DenseMotionField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_motion(&mut w, motion)?;
    w.flush()?;
    Ok(())
}

pub fn read_motion_file(path: impl AsRef<Path>) -> Result<DenseMotionField> {
    read_motion(&mut BufReader::new(File::open(path)?))
}
