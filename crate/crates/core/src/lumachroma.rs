//! BT.709 luma with half-difference opponent chroma.
//!
//! `Y = 0.2126 R + 0.7152 G + 0.0722 B`, `C_R = (R - Y) / 2`,
//! `C_B = (B - Y) / 2`. Luma is evaluated as `G + wr (R - G) + wb (B - G)`
//! and green is recovered from an offset relative to `Y`, so that gray
//! pixels map to zero chroma (and back) without rounding residue.

use rayon::prelude::*;

use crate::image::{clamp_unit, LinearImage, Plane};

pub const LUMA_R: f64 = 0.2126;
pub const LUMA_G: f64 = 0.7152;
pub const LUMA_B: f64 = 0.0722;

/// Luminance plane plus the two opponent chroma planes.
#[derive(Debug, Clone, PartialEq)]
pub struct LumaChroma {
    pub y: Plane,
    pub cr: Plane,
    pub cb: Plane,
}

impl LumaChroma {
    pub fn width(&self) -> usize {
        self.y.width()
    }

    pub fn height(&self) -> usize {
        self.y.height()
    }

    /// Chroma magnitude `S = ||(C_R, C_B)||` of pixel `i`.
    pub fn chroma_magnitude(&self, i: usize) -> f64 {
        self.cr.data()[i].hypot(self.cb.data()[i])
    }
}

#[inline]
pub fn pixel_to_lumachroma([r, g, b]: [f64; 3]) -> (f64, f64, f64) {
    let y = g + LUMA_R * (r - g) + LUMA_B * (b - g);
    (y, (r - y) / 2.0, (b - y) / 2.0)
}

/// Unclamped inverse of [`pixel_to_lumachroma`].
#[inline]
pub fn lumachroma_to_pixel(y: f64, cr: f64, cb: f64) -> [f64; 3] {
    let g_offset = -2.0 * (LUMA_R * cr + LUMA_B * cb) / LUMA_G;
    [y + 2.0 * cr, y + g_offset, y + 2.0 * cb]
}

pub fn rgb_to_lumachroma(img: &LinearImage) -> LumaChroma {
    let n = img.pixels().len();
    let mut y = vec![0.0; n];
    let mut cr = vec![0.0; n];
    let mut cb = vec![0.0; n];
    img.pixels()
        .par_iter()
        .zip(y.par_iter_mut())
        .zip(cr.par_iter_mut())
        .zip(cb.par_iter_mut())
        .for_each(|(((p, y), cr), cb)| {
            (*y, *cr, *cb) = pixel_to_lumachroma(*p);
        });
    let (w, h) = (img.width(), img.height());
    LumaChroma {
        y: Plane::new(w, h, y).expect("dimensions come from a valid image"),
        cr: Plane::new(w, h, cr).expect("dimensions come from a valid image"),
        cb: Plane::new(w, h, cb).expect("dimensions come from a valid image"),
    }
}

/// Reassembles RGB, clamping every sample to `[0, 1]`.
pub fn lumachroma_to_rgb(lc: &LumaChroma) -> LinearImage {
    let pixels: Vec<[f64; 3]> = lc
        .y
        .data()
        .par_iter()
        .zip(lc.cr.data().par_iter())
        .zip(lc.cb.data().par_iter())
        .map(|((&y, &cr), &cb)| lumachroma_to_pixel(y, cr, cb).map(clamp_unit))
        .collect();
    LinearImage::new(lc.width(), lc.height(), pixels).expect("samples clamped to [0, 1]")
}
