use crate::error::{Error, Result};
use crate::grid::FeatureGrid;
use crate::render::RgbImage;

/// How an infinite PSNR is printed.
pub const PSNR_INF_TEXT: &str = "inf";

/// `10 log10(peak^2 / MSE)` in dB; identical inputs give `+inf`.
pub fn psnr(reference: &[f32], test: &[f32], peak: f64) -> Result<f64> {
    if reference.len() != test.len() {
        return Err(Error::shape(format!(
            "PSNR of {} against {} values",
            reference.len(),
            test.len()
        )));
    }
    if peak.is_nan() || peak <= 0.0 {
        return Err(Error::invalid(format!("PSNR peak must be > 0, got {peak}")));
    }
    if reference.is_empty() {
        return Err(Error::invalid("PSNR of empty inputs"));
    }
    let sse: f64 = reference
        .iter()
        .zip(test)
        .map(|(a, b)| {
            let d = f64::from(*a) - f64::from(*b);
            d * d
        })
        .sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse / reference.len() as f64;
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Grid PSNR with the peak taken as `max |reference|`.
pub fn grid_psnr(reference: &FeatureGrid, test: &FeatureGrid) -> Result<f64> {
    reference.ensure_same_shape(test, "grid_psnr")?;
    let peak = f64::from(reference.max_abs());
    if peak == 0.0 {
        return Ok(if reference.data() == test.data() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        });
    }
    psnr(reference.data(), test.data(), peak)
}

/// Image PSNR with peak 1.
pub fn image_psnr(reference: &RgbImage, test: &RgbImage) -> Result<f64> {
    if (reference.width(), reference.height()) != (test.width(), test.height()) {
        return Err(Error::shape("images differ in size"));
    }
    psnr(reference.data(), test.data(), 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(psnr(&[1.0, 2.0], &[1.0, 2.0], 1.0).unwrap(), f64::INFINITY);
        let a = [0.0f32; 4];
        let b = [0.1f32; 4];
        let db = psnr(&a, &b, 1.0).unwrap();
        assert!((db - 20.0).abs() < 1e-5, "{db}");
        assert!(psnr(&a, &b[..3], 1.0).is_err());
        assert!(psnr(&a, &b, 0.0).is_err());
    }
}
