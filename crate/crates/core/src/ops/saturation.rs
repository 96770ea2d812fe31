use rayon::prelude::*;

use crate::lumachroma::LumaChroma;

/// Chroma gain for a pixel of magnitude `s`.
///
/// Increases are capped at `(s + 0.5 (1 - s)) / (s + eps)`, so the scaled
/// magnitude lands at most halfway between `s` and the gamut ceiling of 1.
/// Decreases pass through unmoderated.
pub fn moderated_saturation_gain(s: f64, alpha_s: f64, eps: f64) -> f64 {
    let gain = 1.0 + alpha_s;
    if alpha_s > 0.0 {
        let ceiling = (s + 0.5 * (1.0 - s)) / (s + eps);
        gain.min(ceiling).max(0.0)
    } else {
        gain.max(0.0)
    }
}

/// Scales each pixel's chroma by its moderated gain; luminance is untouched.
pub fn apply_saturation(lc: &LumaChroma, alpha_s: f64, eps: f64) -> LumaChroma {
    if alpha_s == 0.0 {
        return lc.clone();
    }
    let mut cr = lc.cr.clone();
    let mut cb = lc.cb.clone();
    cr.data_mut()
        .par_iter_mut()
        .zip(cb.data_mut().par_iter_mut())
        .for_each(|(r, b)| {
            let gain = moderated_saturation_gain(r.hypot(*b), alpha_s, eps);
            *r *= gain;
            *b *= gain;
        });
    LumaChroma {
        y: lc.y.clone(),
        cr,
        cb,
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::image::Plane;

    #[test]
    fn gain_hand_values() {
        let g = moderated_saturation_gain(0.5, 1.0, 1e-6);
        assert!((g - 0.75 / 0.500001).abs() < 1e-12);
        assert!((g - 1.4999).abs() < 1e-4);
        assert_eq!(moderated_saturation_gain(0.3, 0.0, 1e-6), 1.0);
        assert_eq!(moderated_saturation_gain(0.0, 0.0, 1e-6), 1.0);
        assert!((moderated_saturation_gain(0.3, -0.18, 1e-6) - 0.82).abs() < 1e-15);
    }

    #[test]
    fn small_chroma_not_moderated() {
        // Ceiling is huge near the gray axis, so the raw gain wins.
        assert_eq!(moderated_saturation_gain(0.01, 0.2, 1e-6), 1.2);
    }

    fn lc_from(cr: Vec<f64>, cb: Vec<f64>) -> LumaChroma {
        let n = cr.len();
        LumaChroma {
            y: Plane::filled(n, 1, 0.5).unwrap(),
            cr: Plane::new(n, 1, cr).unwrap(),
            cb: Plane::new(n, 1, cb).unwrap(),
        }
    }

    #[test]
    fn gray_stays_gray() {
        let lc = lc_from(vec![0.0; 4], vec![0.0; 4]);
        assert_eq!(apply_saturation(&lc, 3.0, 1e-6), lc);
    }

    #[test]
    fn zero_alpha_is_bit_identical() {
        let lc = lc_from(vec![0.1, -0.2, 0.3], vec![0.05, 0.0, -0.4]);
        assert_eq!(apply_saturation(&lc, 0.0, 1e-6), lc);
    }

    proptest! {
        #[test]
        fn ceiling_holds(cr in -0.5..0.5f64, cb in -0.5..0.5f64, alpha in 0.0..5.0f64) {
            let lc = lc_from(vec![cr], vec![cb]);
            let out = apply_saturation(&lc, alpha, 1e-6);
            let s = cr.hypot(cb);
            let s_new = out.chroma_magnitude(0);
            prop_assert!(s_new <= s + 0.5 * (1.0 - s) + 1e-6);
            prop_assert_eq!(out.y.data(), lc.y.data());
        }
    }
}
