//! The lossy stage of the codec: channel decorrelation, cube tiling, the
//! 8x8x8 DCT, scalar quantization and the 3D zigzag scan.

mod dct;
mod pca;
mod quant;
mod tile;
mod zigzag;

pub use self::dct::{dct3, idct3};
pub use self::pca::{pca_fit, PcaBasis};
pub use self::quant::{dequantize, quantize, QuantizationSpec, MAX_QUANT_MAGNITUDE};
pub use self::tile::{tile_cubes, untile_cubes};
pub use self::zigzag::{unzigzag3, zigzag3, zigzag_order};

/// Edge length of a transform cube.
pub const CUBE: usize = 8;
/// Values per transform cube.
pub const CUBE_LEN: usize = CUBE * CUBE * CUBE;

/// Storage index of `(i, j, k)` inside a cube, `i` along x.
#[inline]
pub const fn cube_index(i: usize, j: usize, k: usize) -> usize {
    i + CUBE * (j + CUBE * k)
}

/// One 8x8x8 block of a channel, tagged with its cube-lattice index.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffCube<T> {
    pub origin: usize,
    pub values: Box<[T; CUBE_LEN]>,
}

impl<T: Copy + Default> CoeffCube<T> {
    pub fn zeroed(origin: usize) -> Self {
        CoeffCube {
            origin,
            values: Box::new([T::default(); CUBE_LEN]),
        }
    }
}
