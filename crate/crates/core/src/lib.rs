//! Emotion-steered image signal processing.
//!
//! A six-parameter [`ControlVector`] drives saturation, a content-aware
//! tint, a brightness exponent, CLAHE-based local tone mapping and
//! unsharp masking over high-precision linear RGB. Around the pipeline sit
//! the calibrated emotion presets, an inverse path for 8-bit footage, image
//! I/O at exact bit depths and the statistics used to analyse calibration
//! and A/B preference studies.

pub mod config;
pub mod control;
pub mod error;
pub mod image;
pub mod inverse;
pub mod io;
pub mod lumachroma;
pub mod ops;
pub mod pipeline;
pub mod stats;

pub use config::{PipelineConfig, Roi, Stage};
pub use control::{ControlVector, Emotion, Parameter, VAVector};
pub use error::{Error, Result};
pub use image::{LinearImage, Plane};
pub use lumachroma::{lumachroma_to_rgb, rgb_to_lumachroma, LumaChroma};
pub use pipeline::{
    preset_for_emotion, quadrant_from_va, render, render_ab_pair, AbPair, AbTrialDescriptor,
    EmotionPreset, OutputEncoding, RenderRequest, Side,
};
