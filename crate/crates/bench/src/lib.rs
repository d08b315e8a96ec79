//! Fixtures shared by the benchmarks.

use rerf_core::codec::encode_at;
use rerf_core::{generate_sequence, EncodeConfig, SceneSpec, SyntheticSequence};

/// Demo scene of edge `n` with blobs moving 2 voxels per frame.
pub fn sequence(n: usize, frames: usize) -> SyntheticSequence {
    generate_sequence(&SceneSpec::demo(n, frames, 2)).expect("demo scene is valid")
}

/// Encoded stream of [`sequence`] at `s_q` with one GOF.
pub fn stream(n: usize, frames: usize, s_q: f32) -> (SyntheticSequence, Vec<u8>) {
    let seq = sequence(n, frames);
    let cfg = EncodeConfig {
        s_q: vec![s_q],
        gof_length: frames as u32,
        ..EncodeConfig::default()
    };
    let bytes = encode_at(&seq.grids, &seq.motions, &cfg, s_q)
        .expect("encoding the demo scene")
        .bytes;
    (seq, bytes)
}
