use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use image::ImageEncoder;

use crate::error::{Error, Result};

/// Row-major RGB image with channel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<f32>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, data: Vec<f32>) -> Result<Self> {
        if data.len() != width as usize * height as usize * 3 {
            return Err(Error::shape(format!(
                "{} values for a {width}x{height} RGB image",
                data.len()
            )));
        }
        Ok(RgbImage {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [f32; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        image::codecs::png::PngEncoder::new(&mut out).write_image(
            &self.to_rgb8(),
            self.width,
            self.height,
            image::ExtendedColorType::Rgb8,
        )?;
        Ok(out)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_png()?)?;
        Ok(())
    }

    /// `u32 width, u32 height` followed by the `f32` samples, little-endian.
    pub fn write_raw<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_u32::<LittleEndian>(self.width)?;
        w.write_u32::<LittleEndian>(self.height)?;
        for v in &self.data {
            w.write_f32::<LittleEndian>(*v)?;
        }
        Ok(())
    }

    pub fn read_raw<R: Read>(r: &mut R) -> Result<Self> {
        let t = |e| Error::from_read(e, "raw image");
        let width = r.read_u32::<LittleEndian>().map_err(t)?;
        let height = r.read_u32::<LittleEndian>().map_err(t)?;
        let n = width as usize * height as usize * 3;
        if n > 1 << 28 {
            return Err(Error::corrupt("raw image too large"));
        }
        let mut data = vec![0.0; n];
        r.read_f32_into::<LittleEndian>(&mut data).map_err(t)?;
        RgbImage::new(width, height, data)
    }

    pub fn save_raw(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = Vec::with_capacity(8 + self.data.len() * 4);
        self.write_raw(&mut out)?;
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load_raw(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_raw(&mut Cursor::new(std::fs::read(path)?))
    }

    /// Decodes an 8-bit RGB PNG.
    pub fn from_png(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?.to_rgb8();
        let (w, h) = img.dimensions();
        let data = img
            .into_raw()
            .into_iter()
            .map(|v| f32::from(v) / 255.0)
            .collect();
        RgbImage::new(w, h, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_and_raw_round_trip() {
        let img = RgbImage::new(2, 1, vec![0.0, 0.5, 1.0, 0.25, 0.75, 1.0]).unwrap();
        let png = img.to_png().unwrap();
        let back = RgbImage::from_png(&png).unwrap();
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-6);
        }
        let mut raw = Vec::new();
        img.write_raw(&mut raw).unwrap();
        assert_eq!(RgbImage::read_raw(&mut raw.as_slice()).unwrap(), img);
    }
}
