use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::image::{clamp_unit, Plane};
use crate::ops::filters::{gaussian_blur, local_extrema};

/// Radius of the window whose extrema bound the sharpened output.
pub fn overshoot_radius(sigma: f64) -> usize {
    (2.0 * sigma).ceil().max(1.0) as usize
}

/// Overshoot attenuation for a high-pass step `delta` at a sample with
/// `headroom` left before the local window extremum in that direction.
/// 1 while the step fits, then `headroom / |delta|`.
#[inline]
pub fn overshoot_mask(delta: f64, headroom: f64) -> f64 {
    let magnitude = delta.abs();
    if magnitude <= headroom {
        1.0
    } else {
        (headroom / magnitude).max(0.0)
    }
}

/// Unsharp masking with gain `p + alpha_p`:
/// `Y_S = Y + gain (Y - G_sigma(Y)) M(Y)`.
pub fn sharpen(y: &Plane, alpha_p: f64, cfg: &PipelineConfig) -> Plane {
    let gain = cfg.base_sharpening + alpha_p;
    if gain == 0.0 {
        return y.clone();
    }
    let blurred = gaussian_blur(y, cfg.sigma);
    let (lo, hi) = local_extrema(y, overshoot_radius(cfg.sigma));
    let data = y
        .data()
        .par_iter()
        .zip(blurred.data().par_iter())
        .zip(lo.data().par_iter().zip(hi.data().par_iter()))
        .map(|((&v, &b), (&mn, &mx))| {
            let delta = gain * (v - b);
            let headroom = if delta > 0.0 { mx - v } else { v - mn };
            clamp_unit(v + delta * overshoot_mask(delta, headroom))
        })
        .collect();
    y.with_data(data)
}
