use rayon::prelude::*;

use crate::config::{PipelineConfig, Roi};
use crate::error::{Error, Result};
use crate::image::{clamp_unit, Plane};
use crate::ops::clahe::clahe;
use crate::ops::filters::guided_filter;

/// Exponent `beta` that maps the region mean `avg_y` onto
/// `target * (1 + alpha_b)`: `beta = ln(target (1 + alpha_b)) / ln(avg_y)`.
pub fn brightness_exponent(avg_y: f64, alpha_b: f64, target: f64) -> Result<f64> {
    if !(avg_y > 0.0 && avg_y < 1.0) {
        return Err(Error::DegenerateExposure(format!(
            "region mean luminance {avg_y} is outside (0, 1)"
        )));
    }
    let goal = target * (1.0 + alpha_b);
    if !(goal > 0.0 && goal < 1.0) {
        return Err(Error::DegenerateExposure(format!(
            "brightness target {target} * (1 + {alpha_b}) = {goal} is outside (0, 1)"
        )));
    }
    Ok(goal.ln() / avg_y.ln())
}

/// Mean of the plane over `roi`, or over the whole plane. Summed in `f64`
/// in row-major order.
pub fn region_mean(plane: &Plane, roi: Option<Roi>) -> Result<f64> {
    let Some(r) = roi else {
        return Ok(plane.mean());
    };
    if r.width == 0 || r.height == 0 || r.x + r.width > plane.width() || r.y + r.height > plane.height()
    {
        return Err(Error::InvalidConfig(format!(
            "roi {r:?} does not fit a {}x{} image",
            plane.width(),
            plane.height()
        )));
    }
    let w = plane.width();
    let sum: f64 = (r.y..r.y + r.height)
        .flat_map(|y| plane.data()[y * w + r.x..y * w + r.x + r.width].iter())
        .sum();
    Ok(sum / (r.width * r.height) as f64)
}

/// Brightness exponent, CLAHE and base/detail local-contrast boost:
///
/// `Y_TM = (1 + (zeta + alpha_lc) (Y - B) / max(B, eps)) * C(Y^beta)`
///
/// where `B` is the self-guided base layer of `Y` and `C` is CLAHE blended
/// with identity by `clahe_strength`.
pub fn tone_map(y: &Plane, alpha_b: f64, alpha_lc: f64, cfg: &PipelineConfig) -> Result<Plane> {
    let avg = region_mean(y, cfg.roi)?;
    let target = if cfg.preserve_exposure {
        avg
    } else {
        cfg.target_luminance
    };
    let beta = brightness_exponent(avg, alpha_b, target)?;

    let exposed = if beta == 1.0 {
        y.clone()
    } else {
        y.with_data(y.data().par_iter().map(|v| v.max(0.0).powf(beta)).collect())
    };
    let equalized = equalize(&exposed, cfg);

    let boost = cfg.zeta + alpha_lc;
    if boost == 0.0 {
        let data = equalized.data().par_iter().map(|v| clamp_unit(*v)).collect();
        return Ok(y.with_data(data));
    }
    let base = guided_filter(y, cfg.gf_radius, cfg.gf_eps);
    let data = y
        .data()
        .par_iter()
        .zip(base.data().par_iter())
        .zip(equalized.data().par_iter())
        .map(|((&lum, &b), &c)| {
            let detail = (lum - b) / b.max(cfg.eps);
            clamp_unit((1.0 + boost * detail) * c)
        })
        .collect();
    Ok(y.with_data(data))
}

fn equalize(plane: &Plane, cfg: &PipelineConfig) -> Plane {
    let s = cfg.clahe_strength;
    if s == 0.0 {
        return plane.clone();
    }
    let eq = clahe(plane, cfg.clahe_tiles, cfg.clahe_clip);
    if s == 1.0 {
        return eq;
    }
    let data = plane
        .data()
        .par_iter()
        .zip(eq.data().par_iter())
        .map(|(a, b)| a + s * (b - a))
        .collect();
    plane.with_data(data)
}
