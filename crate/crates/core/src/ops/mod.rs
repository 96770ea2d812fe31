//! The emotion-controlled operators and the filters they are built on.
//! Every function here is pure; clamping to `[0, 1]` happens at the end of
//! each operator.

pub mod clahe;
pub mod filters;
pub mod saturation;
pub mod sharpen;
pub mod tint;
pub mod tone;

pub use clahe::clahe;
pub use filters::{box_mean, gaussian_blur, guided_filter, local_extrema};
pub use saturation::{apply_saturation, moderated_saturation_gain};
pub use sharpen::{overshoot_mask, overshoot_radius, sharpen};
pub use tint::{apply_tint, tint_coefficients, tint_weight, TintCoefficients};
pub use tone::{brightness_exponent, region_mean, tone_map};
