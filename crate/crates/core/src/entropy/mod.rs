//! Lossless back end: DPCM for DC coefficients, JPEG-style run-length
//! symbols for AC coefficients, and canonical Huffman coding over an
//! MSB-first bitstream.

mod bits;
mod dpcm;
mod huffman;
mod payload;
mod rle;

pub use self::bits::{BitReader, BitWriter};
pub use self::dpcm::{dpcm_decode, dpcm_encode};
pub use self::huffman::{
    huffman_build, huffman_decode, huffman_encode, HuffmanTable, MAX_CODE_LEN,
};
pub use self::payload::{
    decode_coefficients, decode_motion, encode_coefficients, encode_motion, ZigzagCube,
};
pub use self::rle::{
    amplitude_bits, amplitude_value, rle_decode, rle_encode, size_category, RleSymbol, AC_LEN,
};
