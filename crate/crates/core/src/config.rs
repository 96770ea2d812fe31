//! Pipeline constants and their plain-text `key = value` form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangle used for the luminance average that drives the brightness
/// exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

/// The three rendering stages whose order is configurable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// Saturation followed by tint.
    Color,
    /// Brightness exponent, CLAHE and local-contrast boost.
    Tone,
    Sharpen,
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "color" => Ok(Stage::Color),
            "tone" => Ok(Stage::Tone),
            "sharpen" => Ok(Stage::Sharpen),
            other => Err(Error::InvalidConfig(format!("unknown stage `{other}`"))),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Color => "color",
            Stage::Tone => "tone",
            Stage::Sharpen => "sharpen",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Numerical stability constant for the saturation ceiling, tint weight
    /// and the base-layer division guard.
    pub eps: f64,
    /// Target mean luminance of the region of interest at `alpha_B = 0`.
    pub target_luminance: f64,
    /// When set, the target is the measured region mean instead of
    /// `target_luminance`, so only `alpha_B` moves exposure.
    pub preserve_exposure: bool,
    /// Baseline local-contrast modifier added to `alpha_LC`.
    pub zeta: f64,
    /// Baseline unsharp-mask gain added to `alpha_P`.
    pub base_sharpening: f64,
    /// Gaussian standard deviation of the unsharp mask, in pixels.
    pub sigma: f64,
    pub gf_radius: usize,
    pub gf_eps: f64,
    /// CLAHE grid as (columns, rows).
    pub clahe_tiles: (usize, usize),
    /// Clip limit in multiples of the uniform bin height.
    pub clahe_clip: f64,
    /// Blend between identity (0) and full CLAHE (1).
    pub clahe_strength: f64,
    /// `None` averages the whole frame.
    pub roi: Option<Roi>,
    pub stage_order: [Stage; 3],
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            target_luminance: 0.18,
            preserve_exposure: false,
            zeta: 0.0,
            base_sharpening: 0.5,
            sigma: 1.5,
            gf_radius: 8,
            gf_eps: 1e-3,
            clahe_tiles: (8, 8),
            clahe_clip: 2.0,
            clahe_strength: 1.0,
            roi: None,
            stage_order: [Stage::Color, Stage::Tone, Stage::Sharpen],
        }
    }
}

impl PipelineConfig {
    /// Baseline modifiers zeroed, exposure preserved and CLAHE off: the
    /// all-zero control vector then reproduces the input.
    pub fn pass_through() -> Self {
        Self {
            preserve_exposure: true,
            zeta: 0.0,
            base_sharpening: 0.0,
            clahe_strength: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be > 0, got {}", self.eps));
        }
        if !(self.target_luminance > 0.0 && self.target_luminance < 1.0) {
            return bad(format!("T must lie in (0, 1), got {}", self.target_luminance));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be > 0, got {}", self.sigma));
        }
        if self.gf_radius < 1 {
            return bad("gf_radius must be >= 1".into());
        }
        if !(self.gf_eps > 0.0 && self.gf_eps.is_finite()) {
            return bad(format!("gf_eps must be > 0, got {}", self.gf_eps));
        }
        if self.clahe_tiles.0 == 0 || self.clahe_tiles.1 == 0 {
            return bad("clahe_tiles must be at least 1x1".into());
        }
        if !(self.clahe_clip >= 1.0) {
            return bad(format!("clahe_clip must be >= 1, got {}", self.clahe_clip));
        }
        if !(0.0..=1.0).contains(&self.clahe_strength) {
            return bad(format!(
                "clahe_strength must lie in [0, 1], got {}",
                self.clahe_strength
            ));
        }
        if !self.zeta.is_finite() || !self.base_sharpening.is_finite() {
            return bad("zeta and p must be finite".into());
        }
        if let Some(roi) = self.roi {
            if roi.width == 0 || roi.height == 0 {
                return bad("roi must be non-empty".into());
            }
        }
        let mut seen = self.stage_order.to_vec();
        seen.sort_by_key(|s| *s as u8);
        seen.dedup();
        if seen.len() != 3 {
            return bad("stage_order must name color, tone and sharpen once each".into());
        }
        Ok(())
    }

    /// Parses `key = value` lines. `#` starts a comment. Keys not listed in
    /// [`PipelineConfig::KEYS`] are rejected.
    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::InvalidConfig(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub const KEYS: [&'static str; 13] = [
        "eps",
        "T",
        "preserve_exposure",
        "zeta",
        "p",
        "sigma",
        "gf_radius",
        "gf_eps",
        "clahe_tiles",
        "clahe_clip",
        "clahe_strength",
        "roi",
        "stage_order",
    ];

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("invalid value `{v}` for `{key}`"))
        }
        match key {
            "eps" => self.eps = num(key, value)?,
            "T" => self.target_luminance = num(key, value)?,
            "preserve_exposure" => self.preserve_exposure = num(key, value)?,
            "zeta" => self.zeta = num(key, value)?,
            "p" => self.base_sharpening = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "gf_radius" => self.gf_radius = num(key, value)?,
            "gf_eps" => self.gf_eps = num(key, value)?,
            "clahe_tiles" => {
                let (c, r) = value
                    .split_once(['x', 'X'])
                    .ok_or_else(|| format!("clahe_tiles expects COLSxROWS, got `{value}`"))?;
                self.clahe_tiles = (num(key, c.trim())?, num(key, r.trim())?);
            }
            "clahe_clip" => self.clahe_clip = num(key, value)?,
            "clahe_strength" => self.clahe_strength = num(key, value)?,
            "roi" => {
                if value.eq_ignore_ascii_case("none") || value.eq_ignore_ascii_case("full") {
                    self.roi = None;
                } else {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() != 4 {
                        return Err(format!("roi expects x,y,width,height, got `{value}`"));
                    }
                    self.roi = Some(Roi {
                        x: num(key, parts[0])?,
                        y: num(key, parts[1])?,
                        width: num(key, parts[2])?,
                        height: num(key, parts[3])?,
                    });
                }
            }
            "stage_order" => {
                let stages: Vec<Stage> = value
                    .split(',')
                    .map(|s| s.parse::<Stage>().map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?;
                self.stage_order = stages
                    .try_into()
                    .map_err(|_| "stage_order expects exactly three stages".to_string())?;
            }
            other => {
                return Err(format!(
                    "unknown key `{other}` (expected one of: {})",
                    Self::KEYS.join(", ")
                ))
            }
        }
        Ok(())
    }

    /// Serializes to the form accepted by [`PipelineConfig::parse_kv`].
    pub fn to_kv(&self) -> String {
        let roi = match self.roi {
            None => "full".to_string(),
            Some(r) => format!("{},{},{},{}", r.x, r.y, r.width, r.height),
        };
        let order = self
            .stage_order
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "eps = {}\nT = {}\npreserve_exposure = {}\nzeta = {}\np = {}\nsigma = {}\n\
             gf_radius = {}\ngf_eps = {}\nclahe_tiles = {}x{}\nclahe_clip = {}\n\
             clahe_strength = {}\nroi = {}\nstage_order = {}\n",
            self.eps,
            self.target_luminance,
            self.preserve_exposure,
            self.zeta,
            self.base_sharpening,
            self.sigma,
            self.gf_radius,
            self.gf_eps,
            self.clahe_tiles.0,
            self.clahe_tiles.1,
            self.clahe_clip,
            self.clahe_strength,
            roi,
            order
        )
    }
}
