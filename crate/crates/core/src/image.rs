//! Linear-light rasters and single-channel planes.
//!
//! All samples are `f64` normalized to `[0, 1]`. Quantization happens only
//! at the file boundary (see [`crate::io`]).

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row-major RGB raster in linear light.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl LinearImage {
    /// Builds an image, rejecting empty dimensions and samples outside `[0, 1]`.
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::InvalidImage("dimension overflow".into()))?;
        if pixels.len() != expected {
            return Err(Error::InvalidImage(format!(
                "expected {expected} pixels, got {}",
                pixels.len()
            )));
        }
        if let Some(i) = pixels
            .iter()
            .position(|p| p.iter().any(|v| !(0.0..=1.0).contains(v)))
        {
            return Err(Error::InvalidImage(format!(
                "sample out of [0, 1] at pixel {i}: {:?}",
                pixels[i]
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image from samples that may stray outside `[0, 1]`,
    /// clamping each one. NaN maps to 0.
    pub fn from_clamped(width: usize, height: usize, mut pixels: Vec<[f64; 3]>) -> Result<Self> {
        pixels.par_iter_mut().for_each(|p| {
            for v in p.iter_mut() {
                *v = clamp_unit(*v);
            }
        });
        Self::new(width, height, pixels)
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width.saturating_mul(height)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn into_pixels(self) -> Vec<[f64; 3]> {
        self.pixels
    }

    /// Area-averaging downscale so that the longest side is at most
    /// `max_side`. Returns a clone when the image already fits.
    pub fn downscale_to_fit(&self, max_side: usize) -> LinearImage {
        let longest = self.width.max(self.height);
        if longest <= max_side || max_side == 0 {
            return self.clone();
        }
        let scale = max_side as f64 / longest as f64;
        let out_w = ((self.width as f64 * scale).round() as usize).clamp(1, max_side);
        let out_h = ((self.height as f64 * scale).round() as usize).clamp(1, max_side);
        let pixels: Vec<[f64; 3]> = (0..out_h)
            .into_par_iter()
            .flat_map_iter(|oy| {
                let y0 = oy * self.height / out_h;
                let y1 = ((oy + 1) * self.height / out_h).max(y0 + 1);
                (0..out_w).map(move |ox| {
                    let x0 = ox * self.width / out_w;
                    let x1 = ((ox + 1) * self.width / out_w).max(x0 + 1);
                    let mut acc = [0.0; 3];
                    for y in y0..y1 {
                        for x in x0..x1 {
                            let p = self.pixels[y * self.width + x];
                            acc[0] += p[0];
                            acc[1] += p[1];
                            acc[2] += p[2];
                        }
                    }
                    let n = ((y1 - y0) * (x1 - x0)) as f64;
                    [
                        clamp_unit(acc[0] / n),
                        clamp_unit(acc[1] / n),
                        clamp_unit(acc[2] / n),
                    ]
                })
            })
            .collect();
        LinearImage {
            width: out_w,
            height: out_h,
            pixels,
        }
    }
}

/// Single-channel row-major plane. Values are not range-checked; operators
/// that require `[0, 1]` clamp on output.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "plane dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub(crate) fn with_data(&self, data: Vec<f64>) -> Plane {
        debug_assert_eq!(data.len(), self.data.len());
        Plane {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Mean over the whole plane, summed in `f64` in row-major order.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Clamps to `[0, 1]`, sending NaN to 0.
#[inline]
pub fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dimensions() {
        assert!(LinearImage::new(0, 3, vec![]).is_err());
        assert!(Plane::new(2, 0, vec![]).is_err());
    }

    #[test]
    fn rejects_out_of_range_samples() {
        let err = LinearImage::new(1, 1, vec![[0.5, 1.2, 0.0]]).unwrap_err();
        assert!(err.to_string().contains("out of [0, 1]"));
        assert!(LinearImage::new(1, 1, vec![[f64::NAN, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn from_clamped_clamps_and_zeroes_nan() {
        let img = LinearImage::from_clamped(1, 2, vec![[1.0 + 1e-9, -0.1, f64::NAN], [0.3; 3]])
            .unwrap();
        assert_eq!(img.pixel(0, 0), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn downscale_preserves_constant_and_fits() {
        let img = LinearImage::filled(300, 120, [0.25, 0.5, 0.75]).unwrap();
        let small = img.downscale_to_fit(100);
        assert_eq!(small.width(), 100);
        assert_eq!(small.height(), 40);
        for p in small.pixels() {
            assert!((p[0] - 0.25).abs() < 1e-12);
            assert!((p[2] - 0.75).abs() < 1e-12);
        }
        assert_eq!(img.downscale_to_fit(1024), img);
    }
}
