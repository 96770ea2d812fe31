use rayon::prelude::*;

use crate::image::{clamp_unit, LinearImage};

/// Diagonal per-channel multipliers of the tint matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TintCoefficients {
    pub red: f64,
    pub green: f64,
    pub blue: f64,
}

impl TintCoefficients {
    pub const IDENTITY: TintCoefficients = TintCoefficients {
        red: 1.0,
        green: 1.0,
        blue: 1.0,
    };

    pub fn as_array(&self) -> [f64; 3] {
        [self.red, self.green, self.blue]
    }
}

/// Red-green pushes red against green; yellow-blue pushes red and green
/// together against blue. Each multiplier is floored at 0.
pub fn tint_coefficients(alpha_rg: f64, alpha_yb: f64) -> TintCoefficients {
    TintCoefficients {
        red: (1.0 + alpha_rg + alpha_yb).max(0.0),
        green: (1.0 - alpha_rg + alpha_yb).max(0.0),
        blue: (1.0 - alpha_rg.abs() - alpha_yb).max(0.0),
    }
}

/// Tint weight from the channel extrema: `((max - min) / (max + eps))^2`.
/// Zero for gray pixels, approaching 1 for fully saturated ones.
pub fn tint_weight(pixel: [f64; 3], eps: f64) -> f64 {
    let max = pixel[0].max(pixel[1]).max(pixel[2]);
    let min = pixel[0].min(pixel[1]).min(pixel[2]);
    let base = (max - min) / (max + eps);
    (base * base).clamp(0.0, 1.0)
}

/// Blends each pixel toward its tinted version by its tint weight.
///
/// Evaluated as `I + w (m - 1) I`, algebraically equal to
/// `(1 - w) I + w M I` and exact whenever `w = 0` or `m = 1`.
pub fn apply_tint(img: &LinearImage, coeffs: TintCoefficients, eps: f64) -> LinearImage {
    if coeffs == TintCoefficients::IDENTITY {
        return img.clone();
    }
    let m = coeffs.as_array();
    let pixels: Vec<[f64; 3]> = img
        .pixels()
        .par_iter()
        .map(|&p| {
            let w = tint_weight(p, eps);
            if w == 0.0 {
                return p;
            }
            [
                clamp_unit(p[0] + w * (m[0] - 1.0) * p[0]),
                clamp_unit(p[1] + w * (m[1] - 1.0) * p[1]),
                clamp_unit(p[2] + w * (m[2] - 1.0) * p[2]),
            ]
        })
        .collect();
    LinearImage::new(img.width(), img.height(), pixels).expect("clamped samples")
}
