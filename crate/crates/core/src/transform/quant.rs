use super::{cube_index, CUBE, CUBE_LEN};
use crate::error::{Error, Result};

/// Largest quantized magnitude the entropy stage accepts. Keeps DC
/// differences inside `i32` and amplitude categories at most 31 bits.
pub const MAX_QUANT_MAGNITUDE: i64 = (1 << 30) - 1;

/// Scalar quantizer: step for coefficient `(u, v, w)` is `scale * Q(u, v, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationSpec {
    scale: f32,
    matrix: Box<[f32; CUBE_LEN]>,
}

impl QuantizationSpec {
    pub fn new(scale: f32, matrix: [f32; CUBE_LEN]) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!(
                "quantization scale must be > 0, got {scale}"
            )));
        }
        if let Some(q) = matrix.iter().find(|q| !(**q > 0.0 && q.is_finite())) {
            return Err(Error::invalid(format!(
                "quantization matrix entry must be > 0, got {q}"
            )));
        }
        Ok(QuantizationSpec {
            scale,
            matrix: Box::new(matrix),
        })
    }

    /// Default frequency ramp `Q(u, v, w) = 1 + 2 (u + v + w)`.
    pub fn default_matrix() -> [f32; CUBE_LEN] {
        let mut q = [0.0; CUBE_LEN];
        for w in 0..CUBE {
            for v in 0..CUBE {
                for u in 0..CUBE {
                    q[cube_index(u, v, w)] = (1 + 2 * (u + v + w)) as f32;
                }
            }
        }
        q
    }

    pub fn with_default_matrix(scale: f32) -> Result<Self> {
        Self::new(scale, Self::default_matrix())
    }

    pub fn scale(&self) -> f32 {
        self.scale
    }

    pub fn matrix(&self) -> &[f32; CUBE_LEN] {
        &self.matrix
    }

    #[inline]
    pub fn step(&self, idx: usize) -> f64 {
        f64::from(self.scale) * f64::from(self.matrix[idx])
    }

    pub fn max_step(&self) -> f64 {
        (0..CUBE_LEN).map(|i| self.step(i)).fold(0.0, f64::max)
    }
}

/// `round(R / (S_q Q))`, rounding halves away from zero.
pub fn quantize(coeffs: &[f64; CUBE_LEN], spec: &QuantizationSpec) -> Result<[i32; CUBE_LEN]> {
    let mut out = [0i32; CUBE_LEN];
    for (i, (o, r)) in out.iter_mut().zip(coeffs).enumerate() {
        let q = (r / spec.step(i)).round();
        if q.is_nan() || q.abs() > MAX_QUANT_MAGNITUDE as f64 {
            return Err(Error::invalid(format!(
                "coefficient {r} overflows the quantizer at scale {}",
                spec.scale
            )));
        }
        *o = q as i32;
    }
    Ok(out)
}

pub fn dequantize(levels: &[i32; CUBE_LEN], spec: &QuantizationSpec) -> [f64; CUBE_LEN] {
    let mut out = [0.0; CUBE_LEN];
    for (i, (o, q)) in out.iter_mut().zip(levels).enumerate() {
        *o = f64::from(*q) * spec.step(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_evaluation() {
        let mut m = [1.0; CUBE_LEN];
        m[0] = 2.0;
        let spec = QuantizationSpec::new(1.0, m).unwrap();
        let mut r = [0.0; CUBE_LEN];
        r[0] = 10.6;
        r[1] = -2.5;
        r[2] = 2.5;
        let q = quantize(&r, &spec).unwrap();
        assert_eq!(&q[..3], &[5, -3, 3]);
    }

    #[test]
    fn default_matrix_ramp() {
        let q = QuantizationSpec::default_matrix();
        assert_eq!(q[0], 1.0);
        assert_eq!(q[cube_index(1, 0, 0)], 3.0);
        assert_eq!(q[cube_index(7, 7, 7)], 43.0);
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(QuantizationSpec::with_default_matrix(0.0).is_err());
        assert!(QuantizationSpec::with_default_matrix(f32::NAN).is_err());
        let mut m = [1.0; CUBE_LEN];
        m[100] = -1.0;
        assert!(QuantizationSpec::new(1.0, m).is_err());
    }

    #[test]
    fn small_scale_error_bound() {
        let spec = QuantizationSpec::with_default_matrix(1e-4).unwrap();
        let mut r = [0.0; CUBE_LEN];
        for (i, v) in r.iter_mut().enumerate() {
            *v = (i as f64 - 256.0) * 3e-4;
        }
        let back = dequantize(&quantize(&r, &spec).unwrap(), &spec);
        for (i, (a, b)) in r.iter().zip(&back).enumerate() {
            assert!((a - b).abs() <= 0.5 * spec.step(i) + 1e-12);
        }
    }

    #[test]
    fn overflow_is_an_error() {
        let spec = QuantizationSpec::with_default_matrix(1e-6).unwrap();
        let mut r = [0.0; CUBE_LEN];
        r[0] = 1e5;
        assert!(quantize(&r, &spec).is_err());
    }

    #[test]
    fn requantizing_is_idempotent() {
        let spec = QuantizationSpec::with_default_matrix(0.37).unwrap();
        let mut r = [0.0; CUBE_LEN];
        for (i, v) in r.iter_mut().enumerate() {
            *v = ((i * 31) % 97) as f64 - 48.0;
        }
        let q = quantize(&r, &spec).unwrap();
        assert_eq!(quantize(&dequantize(&q, &spec), &spec).unwrap(), q);
    }
}
