use std::path::{Path, PathBuf};

use super::SyntheticSequence;
use crate::error::{Error, Result};
use crate::grid::{
    read_grid_file, read_motion_file, write_grid_file, write_motion_file, DenseMotionField,
    FeatureGrid,
};

pub const SPEC_FILE: &str = "spec.json";

fn grid_name(t: usize) -> String {
    format!("frame_{t:04}.rrfg")
}

fn motion_name(t: usize) -> String {
    format!("motion_{t:04}.rrfm")
}

/// Writes `frame_TTTT.rrfg`, `motion_TTTT.rrfm` (for frames 1..) and the
/// spec echo into `dir`.
pub fn write_sequence(dir: impl AsRef<Path>, seq: &SyntheticSequence) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for (t, g) in seq.grids.iter().enumerate() {
        write_grid_file(dir.join(grid_name(t)), g)?;
    }
    for (i, m) in seq.motions.iter().enumerate() {
        write_motion_file(dir.join(motion_name(i + 1)), m)?;
    }
    std::fs::write(
        dir.join(SPEC_FILE),
        serde_json::to_string_pretty(&seq.spec)?,
    )?;
    Ok(())
}

fn sorted_with_ext(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads every `.rrfg` in `grids` and every `.rrfm` in `motions`, each in
/// file-name order.
pub fn load_sequence(
    grids: impl AsRef<Path>,
    motions: impl AsRef<Path>,
) -> Result<(Vec<FeatureGrid>, Vec<DenseMotionField>)> {
    let grid_files = sorted_with_ext(grids.as_ref(), "rrfg")?;
    if grid_files.is_empty() {
        return Err(Error::invalid(format!(
            "no .rrfg files in {}",
            grids.as_ref().display()
        )));
    }
    let grids = grid_files
        .iter()
        .map(read_grid_file)
        .collect::<Result<Vec<_>>>()?;
    let motions = sorted_with_ext(motions.as_ref(), "rrfm")?
        .iter()
        .map(read_motion_file)
        .collect::<Result<Vec<_>>>()?;
    Ok((grids, motions))
}
