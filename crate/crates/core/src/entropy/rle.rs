use crate::error::{Error, Result};

/// AC coefficients per cube (all but the DC term of the 512-entry scan).
pub const AC_LEN: usize = 511;

/// Longest zero run a single symbol can carry before a nonzero value.
const MAX_RUN: usize = 15;

/// One run-length token: `run` zeros followed by a value of bit category
/// `size` whose significant bits are `amplitude`. `(0, 0)` is end-of-block
/// and `(15, 0)` is a run of sixteen zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RleSymbol {
    pub run: u8,
    pub size: u8,
    pub amplitude: u32,
}

impl RleSymbol {
    pub const EOB: RleSymbol = RleSymbol {
        run: 0,
        size: 0,
        amplitude: 0,
    };
    pub const ZRL: RleSymbol = RleSymbol {
        run: 15,
        size: 0,
        amplitude: 0,
    };

    /// Huffman alphabet index: `run * 32 + size`.
    #[inline]
    pub fn code(&self) -> u16 {
        u16::from(self.run) * 32 + u16::from(self.size)
    }

    #[inline]
    pub fn from_code(code: u16) -> (u8, u8) {
        ((code / 32) as u8, (code % 32) as u8)
    }
}

/// Bits needed for `|v|`; 0 for zero.
#[inline]
pub fn size_category(v: i64) -> u8 {
    (64 - v.unsigned_abs().leading_zeros()) as u8
}

/// JPEG amplitude convention: negatives are stored one's-complemented.
#[inline]
pub fn amplitude_bits(v: i64, size: u8) -> u32 {
    if v >= 0 {
        v as u32
    } else {
        (v + (1i64 << size) - 1) as u32
    }
}

#[inline]
pub fn amplitude_value(bits: u32, size: u8) -> i64 {
    if size == 0 {
        return 0;
    }
    let b = i64::from(bits);
    if b >> (size - 1) == 1 {
        b
    } else {
        b - (1i64 << size) + 1
    }
}

/// Run-length codes the 511 AC values of one zigzag-scanned cube.
pub fn rle_encode(ac: &[i32]) -> Result<Vec<RleSymbol>> {
    if ac.len() != AC_LEN {
        return Err(Error::shape(format!(
            "RLE expects {AC_LEN} AC values, got {}",
            ac.len()
        )));
    }
    let mut out = Vec::new();
    let mut run = 0usize;
    for &v in ac {
        if v == 0 {
            run += 1;
            continue;
        }
        while run > MAX_RUN {
            out.push(RleSymbol::ZRL);
            run -= MAX_RUN + 1;
        }
        let size = size_category(i64::from(v));
        out.push(RleSymbol {
            run: run as u8,
            size,
            amplitude: amplitude_bits(i64::from(v), size),
        });
        run = 0;
    }
    if run > 0 {
        out.push(RleSymbol::EOB);
    }
    Ok(out)
}

/// Reconstructs the 511 AC values; the symbol list must describe exactly
/// one block.
pub fn rle_decode(symbols: &[RleSymbol]) -> Result<[i32; AC_LEN]> {
    let mut out = [0i32; AC_LEN];
    let mut pos = 0usize;
    for (i, s) in symbols.iter().enumerate() {
        if pos >= AC_LEN {
            return Err(Error::corrupt(
                "RLE symbols continue past the end of the block",
            ));
        }
        match (s.run, s.size) {
            (0, 0) => {
                if i + 1 != symbols.len() {
                    return Err(Error::corrupt("symbols after end-of-block"));
                }
                return Ok(out);
            }
            (15, 0) => pos += MAX_RUN + 1,
            (_, 0) => return Err(Error::corrupt(format!("invalid RLE symbol {:?}", s))),
            (run, size) => {
                pos += usize::from(run);
                if pos >= AC_LEN {
                    return Err(Error::corrupt("RLE run overflows the block"));
                }
                out[pos] = value_of(s.amplitude, size)?;
                pos += 1;
            }
        }
    }
    if pos != AC_LEN {
        return Err(Error::corrupt(format!(
            "RLE block ended after {pos} of {AC_LEN} values"
        )));
    }
    Ok(out)
}

#[inline]
pub(crate) fn value_of(amplitude: u32, size: u8) -> Result<i32> {
    i32::try_from(amplitude_value(amplitude, size))
        .map_err(|_| Error::corrupt("amplitude overflows i32"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_block_is_one_eob() {
        assert_eq!(rle_encode(&[0; AC_LEN]).unwrap(), vec![RleSymbol::EOB]);
        assert_eq!(rle_decode(&[RleSymbol::EOB]).unwrap(), [0; AC_LEN]);
    }

    #[test]
    fn single_value_after_three_zeros() {
        let mut ac = [0; AC_LEN];
        ac[3] = 7;
        let s = rle_encode(&ac).unwrap();
        assert_eq!(
            s,
            vec![
                RleSymbol {
                    run: 3,
                    size: 3,
                    amplitude: 7
                },
                RleSymbol::EOB
            ]
        );
    }

    #[test]
    fn long_runs_use_zrl_and_full_block_has_no_eob() {
        let mut ac = [0; AC_LEN];
        ac[40] = -2;
        ac[AC_LEN - 1] = 1;
        let s = rle_encode(&ac).unwrap();
        assert_eq!(&s[..2], &[RleSymbol::ZRL, RleSymbol::ZRL]);
        assert_eq!(s[2].run, 8);
        assert_eq!(s.last().unwrap().size, 1);
        assert_eq!(rle_decode(&s).unwrap(), ac);
    }

    #[test]
    fn amplitude_convention() {
        for v in [
            -1000i64,
            -3,
            -2,
            -1,
            1,
            2,
            3,
            255,
            (1 << 30) - 1,
            -((1 << 30) - 1),
        ] {
            let s = size_category(v);
            let bits = amplitude_bits(v, s);
            assert!(u64::from(bits) < 1u64 << s);
            assert_eq!(amplitude_value(bits, s), v);
        }
        assert_eq!(size_category(0), 0);
        assert_eq!(size_category(7), 3);
        assert_eq!(amplitude_bits(-1, 1), 0);
    }

    #[test]
    fn malformed_streams_are_rejected() {
        assert!(rle_encode(&[0; 10]).is_err());
        assert!(rle_decode(&[]).is_err());
        let bad = RleSymbol {
            run: 3,
            size: 0,
            amplitude: 0,
        };
        assert!(rle_decode(&[bad]).is_err());
        assert!(rle_decode(&[RleSymbol::EOB, RleSymbol::EOB]).is_err());
        let zrls = vec![RleSymbol::ZRL; 40];
        assert!(rle_decode(&zrls).is_err());
    }
}
