//! Composed entropy payloads for whole frames.
//!
//! Coefficient payload layout: DC table, AC table, `u16` channel count,
//! `u32` cubes per channel, then for every channel a `u32` byte length and
//! its zero-padded bitstream. DC terms are DPCM-coded per channel in cube
//! order; each cube's DC symbol (a size category) is followed by its AC
//! run-length symbols.

use std::collections::BTreeMap;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::bits::{BitReader, BitWriter};
use super::huffman::{huffman_build, HuffmanTable};
use super::rle::{amplitude_bits, rle_encode, size_category, value_of, RleSymbol, AC_LEN};
use crate::error::{Error, Result};
use crate::grid::{Dims, MotionGrid};
use crate::transform::CUBE_LEN;

/// Quantized coefficients of one cube in zigzag order (index 0 is DC).
pub type ZigzagCube = [i32; CUBE_LEN];

/// Largest amplitude category the payload accepts.
const MAX_SIZE: u8 = 31;

struct Token {
    symbol: u16,
    amplitude: u32,
    bits: u8,
}

fn channel_tokens(
    cubes: &[ZigzagCube],
    dc_freq: &mut BTreeMap<u16, u64>,
    ac_freq: &mut BTreeMap<u16, u64>,
) -> Result<Vec<(bool, Token)>> {
    let mut out = Vec::new();
    let mut prev = 0i64;
    for cube in cubes {
        let dc = i64::from(cube[0]);
        let diff = dc - prev;
        prev = dc;
        let size = size_category(diff);
        if size > MAX_SIZE {
            return Err(Error::invalid(format!(
                "DC difference {diff} exceeds 31 bits"
            )));
        }
        *dc_freq.entry(u16::from(size)).or_default() += 1;
        out.push((
            true,
            Token {
                symbol: u16::from(size),
                amplitude: amplitude_bits(diff, size),
                bits: size,
            },
        ));
        for s in rle_encode(&cube[1..])? {
            if s.size > MAX_SIZE {
                return Err(Error::invalid("AC coefficient exceeds 31 bits"));
            }
            *ac_freq.entry(s.code()).or_default() += 1;
            out.push((
                false,
                Token {
                    symbol: s.code(),
                    amplitude: s.amplitude,
                    bits: s.size,
                },
            ));
        }
    }
    Ok(out)
}

fn build_or_empty(freqs: &BTreeMap<u16, u64>) -> Result<HuffmanTable> {
    if freqs.is_empty() {
        HuffmanTable::from_lengths(&[])
    } else {
        huffman_build(freqs)
    }
}

/// Encodes every channel's cubes. All channels must hold the same number
/// of cubes (they share one occupancy mask). With no cubes at all the
/// payload is empty.
pub fn encode_coefficients(channels: &[Vec<ZigzagCube>]) -> Result<Vec<u8>> {
    let cubes = channels.first().map_or(0, Vec::len);
    if channels.iter().any(|c| c.len() != cubes) {
        return Err(Error::shape("channels hold different cube counts"));
    }
    if cubes == 0 {
        return Ok(Vec::new());
    }
    let mut dc_freq = BTreeMap::new();
    let mut ac_freq = BTreeMap::new();
    let tokens = channels
        .iter()
        .map(|c| channel_tokens(c, &mut dc_freq, &mut ac_freq))
        .collect::<Result<Vec<_>>>()?;
    let dc_table = build_or_empty(&dc_freq)?;
    let ac_table = build_or_empty(&ac_freq)?;

    let mut out = Vec::new();
    dc_table.write_to(&mut out);
    ac_table.write_to(&mut out);
    out.write_u16::<LittleEndian>(channels.len() as u16)?;
    out.write_u32::<LittleEndian>(cubes as u32)?;
    for channel in &tokens {
        let mut w = BitWriter::new();
        for (is_dc, t) in channel {
            let table = if *is_dc { &dc_table } else { &ac_table };
            table.write_symbol(&mut w, t.symbol)?;
            w.write(t.amplitude, u32::from(t.bits));
        }
        let bytes = w.finish();
        out.write_u32::<LittleEndian>(bytes.len() as u32)?;
        out.extend_from_slice(&bytes);
    }
    Ok(out)
}

fn decode_channel(
    bits: &[u8],
    cubes: usize,
    dc: &HuffmanTable,
    ac: &HuffmanTable,
) -> Result<Vec<ZigzagCube>> {
    let mut r = BitReader::new(bits);
    let mut out = Vec::with_capacity(cubes);
    let mut prev = 0i64;
    for _ in 0..cubes {
        let mut cube = [0i32; CUBE_LEN];
        let size = dc.read_symbol(&mut r)?;
        if size > u16::from(MAX_SIZE) {
            return Err(Error::corrupt(format!("DC size category {size}")));
        }
        let size = size as u8;
        let diff = super::rle::amplitude_value(r.read(u32::from(size))?, size);
        prev += diff;
        cube[0] = i32::try_from(prev).map_err(|_| Error::corrupt("DC value overflows i32"))?;

        let ac_out = &mut cube[1..];
        let mut pos = 0usize;
        while pos < AC_LEN {
            let (run, size) = RleSymbol::from_code(ac.read_symbol(&mut r)?);
            match (run, size) {
                (0, 0) => break,
                (15, 0) => {
                    pos += 16;
                    if pos >= AC_LEN {
                        return Err(Error::corrupt("zero run overflows the block"));
                    }
                }
                (_, 0) => return Err(Error::corrupt("invalid AC symbol")),
                (run, size) => {
                    if run > 15 || size > MAX_SIZE {
                        return Err(Error::corrupt("invalid AC symbol"));
                    }
                    pos += usize::from(run);
                    if pos >= AC_LEN {
                        return Err(Error::corrupt("AC run overflows the block"));
                    }
                    ac_out[pos] = value_of(r.read(u32::from(size))?, size)?;
                    pos += 1;
                }
            }
        }
        out.push(cube);
    }
    Ok(out)
}

/// Inverse of [`encode_coefficients`]. An empty payload yields no channels.
pub fn decode_coefficients(mut bytes: &[u8]) -> Result<Vec<Vec<ZigzagCube>>> {
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let dc = HuffmanTable::read_from(&mut bytes)?;
    let ac = HuffmanTable::read_from(&mut bytes)?;
    let trunc = |e| Error::from_read(e, "coefficient payload");
    let channels = bytes.read_u16::<LittleEndian>().map_err(trunc)?;
    let cubes = bytes.read_u32::<LittleEndian>().map_err(trunc)? as usize;
    let mut out = Vec::with_capacity(usize::from(channels));
    for _ in 0..channels {
        let len = bytes.read_u32::<LittleEndian>().map_err(trunc)? as usize;
        if bytes.len() < len {
            return Err(Error::Truncated("channel bitstream".into()));
        }
        let (chunk, rest) = bytes.split_at(len);
        out.push(decode_channel(chunk, cubes, &dc, &ac)?);
        bytes = rest;
    }
    if !bytes.is_empty() {
        return Err(Error::corrupt("trailing bytes after coefficient payload"));
    }
    Ok(out)
}

/// Longest run a single motion token can describe.
const MAX_MOTION_RUN: usize = 256;

/// Run-length codes the motion grid in cell order. Layout: `u16` count of
/// distinct vectors and their `i8` components, the vector-id table, the
/// run-length table, `u32` run count, then one (id, length - 1) symbol
/// pair per run.
pub fn encode_motion(motion: &MotionGrid) -> Result<Vec<u8>> {
    let mut palette: Vec<[i8; 3]> = Vec::new();
    let mut runs: Vec<(u16, u16)> = Vec::new();
    for v in motion.vectors() {
        let id = match palette.iter().position(|p| p == v) {
            Some(i) => i,
            None => {
                palette.push(*v);
                palette.len() - 1
            }
        } as u16;
        match runs.last_mut() {
            Some((last, len)) if *last == id && usize::from(*len) < MAX_MOTION_RUN => *len += 1,
            _ => runs.push((id, 1)),
        }
    }
    let mut id_freq = BTreeMap::new();
    let mut len_freq = BTreeMap::new();
    for (id, len) in &runs {
        *id_freq.entry(*id).or_default() += 1u64;
        *len_freq.entry(len - 1).or_default() += 1u64;
    }
    let ids = build_or_empty(&id_freq)?;
    let lens = build_or_empty(&len_freq)?;
    let mut out = Vec::new();
    out.write_u16::<LittleEndian>(palette.len() as u16)?;
    for v in &palette {
        out.extend(v.iter().map(|c| *c as u8));
    }
    ids.write_to(&mut out);
    lens.write_to(&mut out);
    out.write_u32::<LittleEndian>(runs.len() as u32)?;
    let mut w = BitWriter::new();
    for (id, len) in runs {
        ids.write_symbol(&mut w, id)?;
        lens.write_symbol(&mut w, len - 1)?;
    }
    out.extend(w.finish());
    Ok(out)
}

pub fn decode_motion(mut bytes: &[u8], voxel_dims: Dims, kernel: usize) -> Result<MotionGrid> {
    let trunc = |e| Error::from_read(e, "motion payload");
    let colors = usize::from(bytes.read_u16::<LittleEndian>().map_err(trunc)?);
    let mut palette = Vec::with_capacity(colors);
    for _ in 0..colors {
        let mut v = [0u8; 3];
        std::io::Read::read_exact(&mut bytes, &mut v).map_err(trunc)?;
        palette.push(v.map(|c| c as i8));
    }
    let ids = HuffmanTable::read_from(&mut bytes)?;
    let lens = HuffmanTable::read_from(&mut bytes)?;
    let runs = bytes.read_u32::<LittleEndian>().map_err(trunc)? as usize;
    let cells = voxel_dims.blocks(kernel).count();
    if runs > cells {
        return Err(Error::corrupt("more motion runs than cells"));
    }
    let mut r = BitReader::new(bytes);
    let mut vectors = Vec::with_capacity(cells);
    for _ in 0..runs {
        let id = usize::from(ids.read_symbol(&mut r)?);
        let len = usize::from(lens.read_symbol(&mut r)?) + 1;
        let v = *palette
            .get(id)
            .ok_or_else(|| Error::corrupt("motion vector id out of range"))?;
        if len > MAX_MOTION_RUN || vectors.len() + len > cells {
            return Err(Error::corrupt("motion runs overflow the grid"));
        }
        vectors.extend(std::iter::repeat_n(v, len));
    }
    if vectors.len() != cells {
        return Err(Error::corrupt(format!(
            "motion runs cover {} of {cells} cells",
            vectors.len()
        )));
    }
    MotionGrid::from_vectors(voxel_dims, kernel, vectors).map_err(|e| Error::corrupt(e.to_string()))
}
