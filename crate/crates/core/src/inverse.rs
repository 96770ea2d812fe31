//! Approximate inversion of display-referred 8-bit footage back to linear
//! light, and the matching forward encode.
//!
//! Linearization runs: inverse transfer, then the optional inverse tone
//! curve, then the color matrix. Delinearization undoes the three in
//! reverse order and quantizes round-half-up. No step restores precision
//! the 8-bit source never had.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{clamp_unit, LinearImage};

/// 8-bit display-referred RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Srgb8Image {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl Srgb8Image {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::InvalidImage(format!(
                "expected {width}x{height} pixels, got {}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transfer {
    /// Piecewise sRGB curve (IEC 61966-2-1).
    SrgbEotf,
    /// `V^gamma` decode, `L^(1/gamma)` encode.
    PureGamma(f64),
}

impl Transfer {
    /// Encoded `[0, 1]` value to linear light.
    pub fn decode(&self, v: f64) -> f64 {
        match *self {
            Transfer::SrgbEotf => srgb_eotf(v),
            Transfer::PureGamma(g) => v.max(0.0).powf(g),
        }
    }

    /// Linear light to encoded `[0, 1]`.
    pub fn encode(&self, l: f64) -> f64 {
        match *self {
            Transfer::SrgbEotf => srgb_oetf(l),
            Transfer::PureGamma(g) => l.max(0.0).powf(1.0 / g),
        }
    }
}

pub fn srgb_eotf(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

pub fn srgb_oetf(l: f64) -> f64 {
    if l <= 0.0031308 {
        l * 12.92
    } else {
        1.055 * l.powf(1.0 / 2.4) - 0.055
    }
}

/// Strictly monotone piecewise-cubic curve through `(x, y)` control points
/// with Fritsch-Carlson tangents. Anchored at `(0, 0)` and `(1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
    tangents: Vec<f64>,
}

impl ToneCurve {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidConfig(
                "tone curve needs at least two control points".into(),
            ));
        }
        let (first, last) = (points[0], points[points.len() - 1]);
        if first != (0.0, 0.0) || last != (1.0, 1.0) {
            return Err(Error::InvalidConfig(
                "tone curve must start at (0, 0) and end at (1, 1)".into(),
            ));
        }
        if points
            .windows(2)
            .any(|w| !(w[1].0 > w[0].0) || !(w[1].1 > w[0].1))
        {
            return Err(Error::InvalidConfig(
                "tone curve control points must be strictly increasing in x and y".into(),
            ));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        let secants: Vec<f64> = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect();
        let n = xs.len();
        let mut tangents = vec![0.0; n];
        tangents[0] = secants[0];
        tangents[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            tangents[i] = (secants[i - 1] + secants[i]) / 2.0;
        }
        // Fritsch-Carlson limiter keeps each segment monotone.
        for (i, d) in secants.iter().enumerate() {
            let a = tangents[i] / d;
            let b = tangents[i + 1] / d;
            let norm = a.hypot(b);
            if norm > 3.0 {
                let t = 3.0 / norm;
                tangents[i] = t * a * d;
                tangents[i + 1] = t * b * d;
            }
        }
        Ok(Self { xs, ys, tangents })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = (self.xs.partition_point(|&k| k <= x).max(1) - 1).min(self.xs.len() - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.tangents[i] + h01 * self.ys[i + 1] + h11 * h * self.tangents[i + 1]
    }

    /// Inverse by bisection; the curve is monotone so this always converges.
    pub fn invert(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, 1.0);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

pub type Matrix3 = [[f64; 3]; 3];

pub const IDENTITY3: Matrix3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[derive(Debug, Clone, PartialEq)]
pub struct InverseConfig {
    pub transfer: Transfer,
    pub tone_curve: Option<ToneCurve>,
    /// Display-to-sensor color matrix, applied after linearization.
    pub color_matrix: Matrix3,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self {
            transfer: Transfer::SrgbEotf,
            tone_curve: None,
            color_matrix: IDENTITY3,
        }
    }
}

impl InverseConfig {
    pub fn gamma(gamma: f64) -> Self {
        Self {
            transfer: Transfer::PureGamma(gamma),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Transfer::PureGamma(g) = self.transfer {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidConfig(format!("gamma must be > 0, got {g}")));
            }
        }
        if invert3(&self.color_matrix).is_none() {
            return Err(Error::InvalidConfig("color matrix is singular".into()));
        }
        Ok(())
    }

    fn decode_code(&self, code: u8) -> f64 {
        let v = self.transfer.decode(code as f64 / 255.0);
        match &self.tone_curve {
            Some(curve) => curve.eval(v),
            None => v,
        }
    }

    fn encode_value(&self, l: f64) -> u8 {
        let l = match &self.tone_curve {
            Some(curve) => curve.invert(l),
            None => l,
        };
        let v = clamp_unit(self.transfer.encode(clamp_unit(l)));
        (v * 255.0 + 0.5).floor().min(255.0) as u8
    }
}

/// 8-bit codes to linear light.
pub fn linearize(img: &Srgb8Image, cfg: &InverseConfig) -> Result<LinearImage> {
    cfg.validate()?;
    let table: Vec<f64> = (0..=255u8).map(|c| cfg.decode_code(c)).collect();
    let identity = cfg.color_matrix == IDENTITY3;
    let pixels: Vec<[f64; 3]> = img
        .pixels
        .par_iter()
        .map(|p| {
            let lin = p.map(|c| table[c as usize]);
            if identity {
                lin
            } else {
                mul3(&cfg.color_matrix, lin).map(clamp_unit)
            }
        })
        .collect();
    LinearImage::new(img.width, img.height, pixels)
}

/// Linear light to 8-bit codes, the forward counterpart of [`linearize`].
pub fn delinearize(img: &LinearImage, cfg: &InverseConfig) -> Result<Srgb8Image> {
    cfg.validate()?;
    let inverse = invert3(&cfg.color_matrix).expect("validated non-singular");
    let identity = cfg.color_matrix == IDENTITY3;
    let pixels: Vec<[u8; 3]> = img
        .pixels()
        .par_iter()
        .map(|&p| {
            let display = if identity { p } else { mul3(&inverse, p) };
            display.map(|l| cfg.encode_value(l))
        })
        .collect();
    Srgb8Image::new(img.width(), img.height(), pixels)
}

fn mul3(m: &Matrix3, v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|r| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2])
}

fn invert3(m: &Matrix3) -> Option<Matrix3> {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let det = m[0][0] * cof(1, 2, 1, 2) - m[0][1] * cof(1, 2, 0, 2) + m[0][2] * cof(1, 2, 0, 1);
    if det.abs() < 1e-12 || !det.is_finite() {
        return None;
    }
    let inv = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    Some(inv.map(|row| row.map(|v| v / det)))
}

/// Peak signal-to-noise ratio between two 8-bit images, in dB.
/// Infinite for identical images.
pub fn psnr8(a: &Srgb8Image, b: &Srgb8Image) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::InvalidImage("PSNR needs equally sized images".into()));
    }
    let sse: f64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .flat_map(|(p, q)| (0..3).map(move |c| (p[c] as f64 - q[c] as f64).powi(2)))
        .sum();
    let mse = sse / (a.pixels.len() * 3) as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    })
}
