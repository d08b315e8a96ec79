use std::time::Instant;

use super::frame::reconstruct;
use super::StageTimes;
use crate::container::{ByteSource, FrameRecord, FrameType, StreamHeader, StreamReader};
use crate::entropy::{decode_coefficients, decode_motion};
use crate::error::{Error, Result};
use crate::grid::{warp_in_place, FeatureGrid};

/// Random-access frame decoder over any byte source.
#[derive(Debug)]
pub struct Decoder<S> {
    reader: StreamReader<S>,
    template: FeatureGrid,
}

impl<S: ByteSource> Decoder<S> {
    pub fn open(source: S) -> Result<Self> {
        let reader = StreamReader::open(source)?;
        let h = reader.header();
        let template = FeatureGrid::zeros(h.dims, h.channels, h.bbox)?;
        Ok(Decoder { reader, template })
    }

    pub fn header(&self) -> &StreamHeader {
        self.reader.header()
    }

    pub fn reader(&self) -> &StreamReader<S> {
        &self.reader
    }

    pub fn frame_count(&self) -> usize {
        self.reader.frame_count()
    }

    /// Decodes frame `t` given the decoded frame `t - 1` as `reference`,
    /// which is consumed and reused as the output buffer.
    /// I-frames ignore the reference; P-frames require it.
    pub fn decode_step(
        &self,
        t: usize,
        reference: Option<FeatureGrid>,
        times: &mut StageTimes,
    ) -> Result<FeatureGrid> {
        let start = Instant::now();
        let bytes = self
            .reader
            .source()
            .read_range(self.reader.frame_range(t)?)?;
        times.io += start.elapsed();

        let start = Instant::now();
        let header = self.header();
        let record = FrameRecord::from_bytes(&bytes, header.dims)?;
        let expect = if t == self.reader.gof_start(t) {
            FrameType::I
        } else {
            FrameType::P
        };
        if record.index as usize != t || record.frame_type != expect {
            return Err(Error::corrupt(format!(
                "slot {t} holds {} frame {}",
                record.frame_type, record.index
            )));
        }
        let motion = match &record.motion {
            Some(m) => Some(decode_motion(m, header.dims, header.pool_kernel as usize)?),
            None => None,
        };
        let levels = decode_coefficients(&record.coefficients)?;
        times.entropy += start.elapsed();

        let base = match (&motion, reference) {
            (None, _) => None,
            (Some(m), Some(mut prev)) => {
                let start = Instant::now();
                warp_in_place(&mut prev, m)?;
                times.warp_add += start.elapsed();
                Some(prev)
            }
            (Some(_), None) => {
                return Err(Error::invalid(format!(
                    "P-frame {t} needs the previous frame"
                )))
            }
        };
        if let Some(p) = &record.pca {
            if p.rank() != header.pca_rank as usize {
                return Err(Error::corrupt(format!(
                    "frame {t} PCA rank disagrees with the header"
                )));
            }
        }
        reconstruct(
            &levels,
            &record.mask,
            record.pca.as_ref(),
            base,
            &header.quant,
            &self.template,
            times,
        )
    }

    /// Decodes the GOF containing `t` from its I-frame up to `t`, passing
    /// each decoded frame to `sink`. Reads nothing outside that GOF.
    pub fn decode_chain(
        &self,
        t: usize,
        times: &mut StageTimes,
        mut sink: impl FnMut(usize, &FeatureGrid),
    ) -> Result<FeatureGrid> {
        self.decode_from(self.reader.gof_start(t), None, t, times, &mut sink)
    }

    /// Continues decoding from frame `from` (whose predecessor is
    /// `reference`, if `from` is not an I-frame) through `t`.
    pub fn decode_from(
        &self,
        from: usize,
        reference: Option<FeatureGrid>,
        t: usize,
        times: &mut StageTimes,
        sink: &mut impl FnMut(usize, &FeatureGrid),
    ) -> Result<FeatureGrid> {
        if t >= self.frame_count() {
            return Err(Error::OutOfRange {
                index: t,
                len: self.frame_count(),
            });
        }
        if from > t || self.reader.gof_start(from) != self.reader.gof_start(t) {
            return Err(Error::invalid(format!(
                "cannot decode {t} starting from frame {from}"
            )));
        }
        let mut current = reference;
        for f in from..=t {
            let next = self.decode_step(f, current.take(), times)?;
            sink(f, &next);
            current = Some(next);
        }
        Ok(current.expect("at least one frame decoded"))
    }

    pub fn decode_frame(&self, t: usize) -> Result<FeatureGrid> {
        self.decode_chain(t, &mut StageTimes::default(), |_, _| {})
    }

    pub fn decode_frame_timed(&self, t: usize) -> Result<(FeatureGrid, StageTimes)> {
        let mut times = StageTimes::default();
        let g = self.decode_chain(t, &mut times, |_, _| {})?;
        Ok((g, times))
    }
}

/// Decodes frame `t` of an in-memory stream.
pub fn decode_frame(stream: &[u8], t: usize) -> Result<FeatureGrid> {
    Decoder::open(stream)?.decode_frame(t)
}
