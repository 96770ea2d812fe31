//! The six-parameter emotion control vector and the emotion vocabulary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Emotion modifiers applied on top of the neutral rendering.
///
/// The canonical ordering, used everywhere a vector is flattened, is
/// saturation, yellow-blue, red-green, local contrast, brightness,
/// sharpening (`S,YB,RG,LC,B,P`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlVector {
    #[serde(rename = "alpha_S")]
    pub saturation: f64,
    #[serde(rename = "alpha_YB")]
    pub yellow_blue: f64,
    #[serde(rename = "alpha_RG")]
    pub red_green: f64,
    #[serde(rename = "alpha_LC")]
    pub local_contrast: f64,
    #[serde(rename = "alpha_B")]
    pub brightness: f64,
    #[serde(rename = "alpha_P")]
    pub sharpening: f64,
}

impl ControlVector {
    pub const NEUTRAL: ControlVector = ControlVector {
        saturation: 0.0,
        yellow_blue: 0.0,
        red_green: 0.0,
        local_contrast: 0.0,
        brightness: 0.0,
        sharpening: 0.0,
    };

    /// Builds a vector from `[S, YB, RG, LC, B, P]`, rejecting non-finite values.
    pub fn from_array(values: [f64; 6]) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidVector(format!(
                "{} is not finite ({v})",
                Parameter::ALL[i].name()
            )));
        }
        let [saturation, yellow_blue, red_green, local_contrast, brightness, sharpening] = values;
        Ok(Self {
            saturation,
            yellow_blue,
            red_green,
            local_contrast,
            brightness,
            sharpening,
        })
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.saturation,
            self.yellow_blue,
            self.red_green,
            self.local_contrast,
            self.brightness,
            self.sharpening,
        ]
    }

    pub fn get(&self, parameter: Parameter) -> f64 {
        self.to_array()[parameter as usize]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        Self::from_array(self.to_array()).map(|_| ())
    }

    /// Parses the comma-separated `S,YB,RG,LC,B,P` form. Exactly six values.
    pub fn parse_list(text: &str) -> Result<Self> {
        let values: Vec<&str> = text.split(',').map(str::trim).collect();
        if values.len() != 6 {
            return Err(Error::InvalidVector(format!(
                "expected 6 comma-separated values (S,YB,RG,LC,B,P), got {}",
                values.len()
            )));
        }
        let mut out = [0.0; 6];
        for (slot, raw) in out.iter_mut().zip(&values) {
            *slot = raw
                .parse()
                .map_err(|_| Error::InvalidVector(format!("`{raw}` is not a number")))?;
        }
        Self::from_array(out)
    }

    pub fn to_list(&self) -> String {
        self.to_array()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Names of the six control parameters, in vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parameter {
    Saturation = 0,
    YellowBlue = 1,
    RedGreen = 2,
    LocalContrast = 3,
    Brightness = 4,
    Sharpening = 5,
}

impl Parameter {
    pub const ALL: [Parameter; 6] = [
        Parameter::Saturation,
        Parameter::YellowBlue,
        Parameter::RedGreen,
        Parameter::LocalContrast,
        Parameter::Brightness,
        Parameter::Sharpening,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Saturation => "alpha_S",
            Parameter::YellowBlue => "alpha_YB",
            Parameter::RedGreen => "alpha_RG",
            Parameter::LocalContrast => "alpha_LC",
            Parameter::Brightness => "alpha_B",
            Parameter::Sharpening => "alpha_P",
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let key = key.strip_prefix("alpha_").unwrap_or(&key);
        Ok(match key {
            "s" | "saturation" => Parameter::Saturation,
            "yb" | "yellow_blue" => Parameter::YellowBlue,
            "rg" | "red_green" => Parameter::RedGreen,
            "lc" | "local_contrast" => Parameter::LocalContrast,
            "b" | "brightness" => Parameter::Brightness,
            "p" | "sharpening" => Parameter::Sharpening,
            _ => return Err(Error::InvalidVector(format!("unknown parameter `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Emotion {
    Happy,
    Calm,
    Angry,
    Sad,
    Neutral,
}

impl Emotion {
    pub const ALL: [Emotion; 5] = [
        Emotion::Happy,
        Emotion::Calm,
        Emotion::Angry,
        Emotion::Sad,
        Emotion::Neutral,
    ];

    /// The four calibrated emotion classes (everything except `Neutral`).
    pub const CALIBRATED: [Emotion; 4] = [Emotion::Happy, Emotion::Calm, Emotion::Angry, Emotion::Sad];

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Happy => "Happy",
            Emotion::Calm => "Calm",
            Emotion::Angry => "Angry",
            Emotion::Sad => "Sad",
            Emotion::Neutral => "Neutral",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "happy" => Ok(Emotion::Happy),
            "calm" => Ok(Emotion::Calm),
            "angry" => Ok(Emotion::Angry),
            "sad" => Ok(Emotion::Sad),
            "neutral" => Ok(Emotion::Neutral),
            _ => Err(Error::UnknownEmotion(s.to_string())),
        }
    }
}

/// Valence/arousal pair, both centered at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VAVector {
    pub valence: f64,
    pub arousal: f64,
}

impl VAVector {
    pub fn new(valence: f64, arousal: f64) -> Result<Self> {
        if !valence.is_finite() || !arousal.is_finite() {
            return Err(Error::InvalidVector(format!(
                "valence/arousal must be finite, got ({valence}, {arousal})"
            )));
        }
        Ok(Self { valence, arousal })
    }
}
