//! The full rendering chain, the calibrated emotion presets and the
//! valence/arousal quadrant mapping.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, Stage};
use crate::control::{ControlVector, Emotion, Parameter, VAVector};
use crate::error::{Error, Result};
use crate::image::LinearImage;
use crate::io::{self, ImageFile, QuantizedImage};
use crate::lumachroma::{lumachroma_to_rgb, rgb_to_lumachroma};
use crate::ops::{apply_saturation, apply_tint, sharpen, tint_coefficients, tone_map, TintCoefficients};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionPreset {
    pub emotion: Emotion,
    pub vector: ControlVector,
}

/// Calibrated control vector for each emotion. `Neutral` is all zeros.
pub fn preset_for_emotion(emotion: Emotion) -> ControlVector {
    let [saturation, yellow_blue, red_green, local_contrast, brightness, sharpening] = match emotion
    {
        Emotion::Angry => [0.15, 0.0, 0.19, 0.32, -0.08, 0.7],
        Emotion::Calm => [0.0, 0.0, 0.0, 0.0, 0.0, -0.2],
        Emotion::Happy => [0.2, 0.0, 0.0, 0.14, 0.19, 0.0],
        Emotion::Sad => [-0.18, -0.1, 0.0, -0.02, -0.09, 0.0],
        Emotion::Neutral => return ControlVector::NEUTRAL,
    };
    ControlVector {
        saturation,
        yellow_blue,
        red_green,
        local_contrast,
        brightness,
        sharpening,
    }
}

pub fn shipped_presets() -> Vec<EmotionPreset> {
    Emotion::ALL
        .into_iter()
        .map(|emotion| EmotionPreset {
            emotion,
            vector: preset_for_emotion(emotion),
        })
        .collect()
}

/// Renders presets as `emotion.alpha_X = value` lines, one per cell.
pub fn presets_document(presets: &[EmotionPreset]) -> String {
    let mut out = String::from("# Emotion presets. Vector order: S,YB,RG,LC,B,P\n");
    for preset in presets {
        out.push('\n');
        for p in Parameter::ALL {
            out.push_str(&format!(
                "{}.{} = {}\n",
                preset.emotion.name().to_ascii_lowercase(),
                p.name(),
                preset.vector.get(p)
            ));
        }
    }
    out
}

/// Parses the output of [`presets_document`]. Every listed emotion must
/// define all six parameters.
pub fn parse_presets_document(text: &str) -> Result<Vec<EmotionPreset>> {
    let mut cells: BTreeMap<Emotion, [Option<f64>; 6]> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| Error::MalformedRecord { line: i + 1, reason };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad("expected `emotion.alpha_X = value`".into()))?;
        let (emotion, param) = key
            .trim()
            .split_once('.')
            .ok_or_else(|| bad(format!("key `{}` lacks an emotion prefix", key.trim())))?;
        let emotion: Emotion = emotion.parse().map_err(|e: Error| bad(e.to_string()))?;
        let param: Parameter = param.parse().map_err(|e: Error| bad(e.to_string()))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| bad(format!("`{}` is not a number", value.trim())))?;
        cells.entry(emotion).or_default()[param as usize] = Some(value);
    }
    cells
        .into_iter()
        .map(|(emotion, values)| {
            let mut arr = [0.0; 6];
            for (slot, (v, p)) in arr.iter_mut().zip(values.iter().zip(Parameter::ALL)) {
                *slot = v.ok_or_else(|| {
                    Error::InvalidVector(format!("{emotion} preset is missing {p}"))
                })?;
            }
            Ok(EmotionPreset {
                emotion,
                vector: ControlVector::from_array(arr)?,
            })
        })
        .collect()
}

/// Sign quadrant of a valence/arousal pair. Zero on either axis is a
/// border case and is rejected rather than guessed.
pub fn quadrant_from_va(va: VAVector) -> Result<Emotion> {
    let VAVector { valence, arousal } = va;
    if valence == 0.0 || arousal == 0.0 || !valence.is_finite() || !arousal.is_finite() {
        return Err(Error::BorderCase { valence, arousal });
    }
    Ok(match (valence > 0.0, arousal > 0.0) {
        (true, true) => Emotion::Happy,
        (true, false) => Emotion::Calm,
        (false, true) => Emotion::Angry,
        (false, false) => Emotion::Sad,
    })
}

/// Runs the configured stages over `img`. Pure and deterministic.
pub fn render(img: &LinearImage, vector: &ControlVector, cfg: &PipelineConfig) -> Result<LinearImage> {
    vector.validate()?;
    cfg.validate()?;
    let mut current = img.clone();
    for stage in cfg.stage_order {
        current = match stage {
            Stage::Color => color_stage(&current, vector, cfg),
            Stage::Tone => {
                let mut lc = rgb_to_lumachroma(&current);
                lc.y = tone_map(&lc.y, vector.brightness, vector.local_contrast, cfg)?;
                lumachroma_to_rgb(&lc)
            }
            Stage::Sharpen => {
                if cfg.base_sharpening + vector.sharpening == 0.0 {
                    current
                } else {
                    let mut lc = rgb_to_lumachroma(&current);
                    lc.y = sharpen(&lc.y, vector.sharpening, cfg);
                    lumachroma_to_rgb(&lc)
                }
            }
        };
    }
    Ok(current)
}

fn color_stage(img: &LinearImage, vector: &ControlVector, cfg: &PipelineConfig) -> LinearImage {
    let saturated = if vector.saturation == 0.0 {
        img.clone()
    } else {
        lumachroma_to_rgb(&apply_saturation(&rgb_to_lumachroma(img), vector.saturation, cfg.eps))
    };
    let coeffs = tint_coefficients(vector.red_green, vector.yellow_blue);
    if coeffs == TintCoefficients::IDENTITY {
        saturated
    } else {
        apply_tint(&saturated, coeffs, cfg.eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputEncoding {
    /// 8-bit sRGB-encoded.
    Srgb8,
    /// 16-bit linear.
    Linear16,
}

impl FromStr for OutputEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "8" | "srgb8" => Ok(OutputEncoding::Srgb8),
            "16" | "linear16" => Ok(OutputEncoding::Linear16),
            other => Err(Error::InvalidConfig(format!("unknown bit depth `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RenderRequest {
    pub image: ImageFile,
    pub vector: ControlVector,
    pub config: PipelineConfig,
    pub encoding: OutputEncoding,
}

impl RenderRequest {
    pub fn new(path: impl Into<PathBuf>, vector: ControlVector) -> Result<Self> {
        Ok(Self {
            image: ImageFile::infer(path)?,
            vector,
            config: PipelineConfig::default(),
            encoding: OutputEncoding::Linear16,
        })
    }

    /// Loads the referenced image, renders it and quantizes the result.
    pub fn execute(&self) -> Result<QuantizedImage> {
        let img = io::load_image(&self.image)?;
        let out = render(&img, &self.vector, &self.config)?;
        Ok(QuantizedImage::encode(&out, self.encoding))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(Error::InvalidConfig(format!("unknown side `{other}`"))),
        }
    }
}

/// What one A/B trial shows and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbTrialDescriptor {
    pub image_id: String,
    pub shown_emotion: Emotion,
    pub is_correct_emotion: bool,
    /// Side carrying the emotion rendering; the neutral rendering is on
    /// the other side.
    pub emotion_side: Side,
}

/// Draws whether the correct or the wrong emotion is shown and which side
/// it goes on. Both draws come from `rng`, in that order.
pub fn assign_ab_trial<R: Rng + ?Sized>(
    rng: &mut R,
    image_id: &str,
    correct: Emotion,
    wrong: Emotion,
) -> Result<AbTrialDescriptor> {
    if correct == Emotion::Neutral || wrong == Emotion::Neutral {
        return Err(Error::InvalidConfig(
            "A/B trials compare an emotion against neutral; neither emotion may be Neutral".into(),
        ));
    }
    if correct == wrong {
        return Err(Error::InvalidConfig(format!(
            "wrong emotion must differ from the correct one ({correct})"
        )));
    }
    let is_correct_emotion = rng.random_bool(0.5);
    let emotion_side = if rng.random_bool(0.5) {
        Side::Left
    } else {
        Side::Right
    };
    Ok(AbTrialDescriptor {
        image_id: image_id.to_string(),
        shown_emotion: if is_correct_emotion { correct } else { wrong },
        is_correct_emotion,
        emotion_side,
    })
}

/// Neutral and emotion renderings of one image plus the trial descriptor.
#[derive(Debug, Clone)]
pub struct AbPair {
    pub neutral: LinearImage,
    pub emotion: LinearImage,
    pub descriptor: AbTrialDescriptor,
}

impl AbPair {
    /// Images in display order `(left, right)`.
    pub fn left_right(&self) -> (&LinearImage, &LinearImage) {
        match self.descriptor.emotion_side {
            Side::Left => (&self.emotion, &self.neutral),
            Side::Right => (&self.neutral, &self.emotion),
        }
    }
}

pub fn render_ab_pair<R: Rng + ?Sized>(
    image_id: &str,
    img: &LinearImage,
    correct: Emotion,
    wrong: Emotion,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<AbPair> {
    let descriptor = assign_ab_trial(rng, image_id, correct, wrong)?;
    let neutral = render(img, &ControlVector::NEUTRAL, cfg)?;
    let emotion = render(img, &preset_for_emotion(descriptor.shown_emotion), cfg)?;
    Ok(AbPair {
        neutral,
        emotion,
        descriptor,
    })
}
