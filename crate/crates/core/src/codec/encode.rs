use rayon::prelude::*;

use super::frame::{forward_levels, nonzero_rows, reconstruct};
use super::report::{EncodeReport, FrameReport};
use super::{EncodeConfig, StageTimes};
use crate::container::{FrameRecord, FrameType, StreamHeader, StreamWriter};
use crate::entropy::{encode_coefficients, encode_motion};
use crate::error::{Error, Result};
use crate::grid::{
    compute_residual, motion_pool, occupancy_from_grid, warp_in_place, DenseMotionField,
    FeatureGrid,
};
use crate::transform::{pca_fit, PcaBasis, QuantizationSpec, CUBE};

/// One coded stream of the quality ladder.
#[derive(Debug, Clone)]
pub struct EncodedStream {
    pub s_q: f32,
    pub bytes: Vec<u8>,
    pub report: EncodeReport,
}

/// Encodes the sequence once per entry of the configured S_q ladder.
/// `motions[t]` maps frame `t + 1` onto frame `t`.
pub fn encode_sequence(
    grids: &[FeatureGrid],
    motions: &[DenseMotionField],
    cfg: &EncodeConfig,
) -> Result<Vec<EncodedStream>> {
    cfg.validate()?;
    cfg.s_q
        .iter()
        .map(|s| encode_at(grids, motions, cfg, *s))
        .collect()
}

pub fn encode_at(
    grids: &[FeatureGrid],
    motions: &[DenseMotionField],
    cfg: &EncodeConfig,
    s_q: f32,
) -> Result<EncodedStream> {
    encode_at_with(grids, motions, cfg, s_q, |_, _| {})
}

/// Like [`encode_at`], handing every encoder-side reconstruction to
/// `observer` as `(frame, grid)`. GOFs are encoded in parallel, so calls
/// may arrive out of order.
pub fn encode_at_with(
    grids: &[FeatureGrid],
    motions: &[DenseMotionField],
    cfg: &EncodeConfig,
    s_q: f32,
    observer: impl Fn(usize, &FeatureGrid) + Sync,
) -> Result<EncodedStream> {
    let header = prepare(grids, motions, cfg, s_q)?;
    let gof = cfg.gof_length as usize;
    let gofs: Vec<Vec<FrameRecord>> = (0..header.gof_count())
        .into_par_iter()
        .map(|g| {
            let frames = g * gof..((g + 1) * gof).min(grids.len());
            encode_gof(grids, motions, &header, cfg.tau, frames, &observer)
        })
        .collect::<Result<_>>()?;

    let mut writer = StreamWriter::new(std::io::Cursor::new(Vec::new()), header.clone())?;
    let mut frames = Vec::with_capacity(grids.len());
    for record in gofs.iter().flatten() {
        writer.write_frame(record)?;
        frames.push(FrameReport {
            index: record.index as usize,
            frame_type: record.frame_type,
            sizes: record.sizes(),
        });
    }
    let bytes = writer.finish()?.into_inner();
    let report = EncodeReport::new(&header, frames, bytes.len(), header.to_bytes().len());
    Ok(EncodedStream { s_q, bytes, report })
}

fn prepare(
    grids: &[FeatureGrid],
    motions: &[DenseMotionField],
    cfg: &EncodeConfig,
    s_q: f32,
) -> Result<StreamHeader> {
    cfg.validate()?;
    let first = grids
        .first()
        .ok_or_else(|| Error::invalid("cannot encode an empty sequence"))?;
    for (t, g) in grids.iter().enumerate() {
        first.ensure_same_shape(g, &format!("frame {t}"))?;
    }
    if motions.len() + 1 != grids.len() {
        return Err(Error::shape(format!(
            "{} frames need {} motion fields, got {}",
            grids.len(),
            grids.len() - 1,
            motions.len()
        )));
    }
    if let Some((t, _)) = motions
        .iter()
        .enumerate()
        .find(|(_, m)| m.dims() != first.dims())
    {
        return Err(Error::shape(format!(
            "motion field {t} does not match the grid dims"
        )));
    }
    let channels = first.channels();
    let pca_rank = cfg.pca_rank.unwrap_or(channels as u32);
    if pca_rank as usize > channels {
        return Err(Error::invalid(format!(
            "PCA rank {pca_rank} exceeds {channels} channels"
        )));
    }
    let header = StreamHeader {
        dims: first.dims(),
        channels,
        bbox: first.bbox(),
        gof_length: cfg.gof_length,
        pool_kernel: cfg.pool_kernel,
        pca_rank,
        iframe_pca: false,
        quant: QuantizationSpec::with_default_matrix(s_q)?,
        frame_rate: cfg.frame_rate,
        frame_count: u32::try_from(grids.len()).map_err(|_| Error::invalid("too many frames"))?,
        decoder: cfg.decoder.clone(),
        index_offset: 0,
    };
    header.validate()?;
    Ok(header)
}

fn encode_gof(
    grids: &[FeatureGrid],
    motions: &[DenseMotionField],
    header: &StreamHeader,
    tau: f32,
    frames: std::ops::Range<usize>,
    observer: &(impl Fn(usize, &FeatureGrid) + Sync),
) -> Result<Vec<FrameRecord>> {
    let mut records = Vec::with_capacity(frames.len());
    let mut reference: Option<FeatureGrid> = None;
    let mut scratch = StageTimes::default();
    for t in frames {
        let (record, recon) = match reference.take() {
            None => encode_intra(&grids[t], header, t, &mut scratch)?,
            Some(prev) => encode_predicted(
                &grids[t],
                prev,
                &motions[t - 1],
                header,
                tau,
                t,
                &mut scratch,
            )?,
        };
        observer(t, &recon);
        records.push(record);
        reference = Some(recon);
    }
    Ok(records)
}

fn encode_intra(
    grid: &FeatureGrid,
    header: &StreamHeader,
    t: usize,
    scratch: &mut StageTimes,
) -> Result<(FrameRecord, FeatureGrid)> {
    let mask = occupancy_from_grid(grid, CUBE)?;
    let planes: Vec<&[f32]> = (0..grid.channels()).map(|c| grid.channel(c)).collect();
    let (mask, levels) = forward_levels(&planes, grid.dims(), &mask, &header.quant)?;
    let recon = reconstruct(&levels, &mask, None, None, &header.quant, grid, scratch)?;
    let record = FrameRecord {
        frame_type: FrameType::I,
        index: t as u32,
        mask,
        pca: None,
        motion: None,
        coefficients: encode_coefficients(&levels)?,
    };
    Ok((record, recon))
}

fn encode_predicted(
    grid: &FeatureGrid,
    mut reference: FeatureGrid,
    dense: &DenseMotionField,
    header: &StreamHeader,
    tau: f32,
    t: usize,
    scratch: &mut StageTimes,
) -> Result<(FrameRecord, FeatureGrid)> {
    let motion = motion_pool(dense, header.pool_kernel as usize)?;
    warp_in_place(&mut reference, &motion)?;
    let base = reference;
    let residual = compute_residual(grid, &base, tau)?;
    let mask = occupancy_from_grid(&residual, CUBE)?;
    // Cubes whose residual already quantizes to zero channel by channel
    // sit below the quantizer's resolution and are left uncoded.
    let channel_planes: Vec<&[f32]> = (0..grid.channels()).map(|c| residual.channel(c)).collect();
    let (mask, _) = forward_levels(&channel_planes, grid.dims(), &mask, &header.quant)?;

    let channels = grid.channels();
    let q = header.pca_rank as usize;
    let dims = grid.dims();
    let lattice = mask.dims();
    let rows: Vec<(usize, Vec<f32>)> = nonzero_rows(&residual)
        .into_iter()
        .filter(|(v, _)| {
            let (x, y, z) = (
                v % dims.nx,
                (v / dims.nx) % dims.ny,
                v / (dims.nx * dims.ny),
            );
            mask.get(lattice.index(x / CUBE, y / CUBE, z / CUBE))
        })
        .collect();
    let basis = if rows.is_empty() {
        PcaBasis::identity(channels, q)
    } else {
        let flat: Vec<f32> = rows.iter().flat_map(|(_, r)| r.iter().copied()).collect();
        pca_fit(&flat, channels, q)?
    };
    let plane = grid.voxel_count();
    let mut planes = vec![vec![0.0f32; plane]; q];
    let mut out = vec![0.0f64; q];
    for (v, row) in &rows {
        basis.project_row(row, &mut out);
        for (j, o) in out.iter().enumerate() {
            planes[j][*v] = *o as f32;
        }
    }

    let (mask, levels) = forward_levels(&planes, grid.dims(), &mask, &header.quant)?;
    let recon = reconstruct(
        &levels,
        &mask,
        Some(&basis),
        Some(base),
        &header.quant,
        grid,
        scratch,
    )?;
    let pca = (mask.occupied_count() > 0).then_some(basis);
    let record = FrameRecord {
        frame_type: FrameType::P,
        index: t as u32,
        mask,
        pca,
        motion: Some(encode_motion(&motion)?),
        coefficients: encode_coefficients(&levels)?,
    };
    Ok((record, recon))
}
