//! Residual radiance field codec.
//!
//! A dynamic volumetric scene is a sequence of dense feature grids. Each
//! group of frames starts with an intra-coded grid; the following frames
//! are predicted by warping the previously decoded grid with a pooled
//! motion grid and coding only the sparse residual. Both paths go through
//! channel PCA (residuals only), an 8x8x8 DCT, scalar quantization and a
//! JPEG-style entropy stage, and frames are packed into a seekable
//! container whose unit of random access is the group of frames.

pub mod codec;
pub mod container;
pub mod entropy;
pub mod error;
pub mod grid;
pub mod render;
pub mod synth;
pub mod transform;

pub use codec::{Decoder, EncodeConfig, EncodeReport, StageTimes};
pub use container::{ByteSource, FileSource, Manifest, QualityLevel, StreamHeader, StreamReader};
pub use error::{Error, Result};
pub use grid::{
    apply_residual, compute_residual, motion_pool, occupancy_from_grid, warp_features,
    warp_in_place, BBox, DenseMotionField, Dims, FeatureGrid, MotionGrid, OccupancyMask,
    OutOfBounds, ResidualGrid,
};
pub use render::{render_image, Camera, ColorDecoder, DecoderMlp, RenderConfig, RgbImage};
pub use synth::{generate_sequence, SceneSpec, SyntheticSequence};
