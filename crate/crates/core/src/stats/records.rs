//! Study logs: one JSON object per line.

use std::fs::OpenOptions;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::control::{ControlVector, Emotion};
use crate::error::{Error, Result};
use crate::pipeline::Side;

/// One calibration trial: the vector a subject chose for an image and a
/// target emotion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub subject_id: String,
    pub image_id: String,
    pub target_emotion: Emotion,
    pub chosen: ControlVector,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_id: Option<String>,
}

impl CalibrationRecord {
    pub fn validate(&self) -> Result<()> {
        if self.target_emotion == Emotion::Neutral {
            return Err(Error::InvalidVector(
                "calibration target emotion cannot be Neutral".into(),
            ));
        }
        self.chosen.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    EmotionSide,
    NeutralSide,
}

/// One A/B judgement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbRecord {
    pub subject_id: String,
    pub clip_id: String,
    pub shown_emotion: Emotion,
    pub is_correct_emotion: bool,
    pub emotion_side: Side,
    pub choice: Choice,
    pub timestamp: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_id: Option<String>,
}

impl AbRecord {
    /// `Neutral` is never a valid shown emotion; `Calm` only when the
    /// protocol includes it.
    pub fn validate(&self, include_calm: bool) -> Result<()> {
        match self.shown_emotion {
            Emotion::Neutral => Err(Error::InvalidVector(
                "A/B shown emotion cannot be Neutral".into(),
            )),
            Emotion::Calm if !include_calm => Err(Error::InvalidVector(
                "Calm is excluded from A/B trials under the default protocol".into(),
            )),
            _ => Ok(()),
        }
    }
}

fn read_lines<T: DeserializeOwned>(
    reader: impl BufRead,
    validate: impl Fn(&T) -> Result<()>,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(trimmed).map_err(|e| Error::MalformedRecord {
            line: i + 1,
            reason: e.to_string(),
        })?;
        validate(&record).map_err(|e| Error::MalformedRecord {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn read_calibration_records(reader: impl BufRead) -> Result<Vec<CalibrationRecord>> {
    read_lines(reader, CalibrationRecord::validate)
}

pub fn read_ab_records(reader: impl BufRead, include_calm: bool) -> Result<Vec<AbRecord>> {
    read_lines(reader, |r: &AbRecord| r.validate(include_calm))
}

pub fn to_json_line<T: Serialize>(record: &T) -> String {
    let mut line = serde_json::to_string(record).expect("records serialize");
    line.push('\n');
    line
}

/// Appends one record and flushes it to disk before returning.
pub fn append_record<T: Serialize>(path: &Path, record: &T) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    file.write_all(to_json_line(record).as_bytes())?;
    file.sync_data()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calibration() -> CalibrationRecord {
        CalibrationRecord {
            subject_id: "s1".into(),
            image_id: "a0001".into(),
            target_emotion: Emotion::Happy,
            chosen: ControlVector {
                brightness: 0.19,
                ..ControlVector::NEUTRAL
            },
            timestamp: 1_700_000_000_000,
            session_id: None,
            trial_id: None,
        }
    }

    #[test]
    fn calibration_line_format() {
        let line = to_json_line(&calibration());
        assert!(line.starts_with(r#"{"subject_id":"s1","image_id":"a0001","target_emotion":"Happy","chosen":{"alpha_S":0.0"#));
        let back = read_calibration_records(line.as_bytes()).unwrap();
        assert_eq!(back, vec![calibration()]);
    }

    #[test]
    fn neutral_target_rejected_with_line_number() {
        let mut r = calibration();
        r.target_emotion = Emotion::Neutral;
        let text = format!("{}\n{}", to_json_line(&calibration()), to_json_line(&r));
        match read_calibration_records(text.as_bytes()) {
            Err(Error::MalformedRecord { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ab_calm_policy() {
        let r = AbRecord {
            subject_id: "s".into(),
            clip_id: "c".into(),
            shown_emotion: Emotion::Calm,
            is_correct_emotion: true,
            emotion_side: Side::Left,
            choice: Choice::EmotionSide,
            timestamp: 0,
            session_id: None,
            trial_id: None,
        };
        let line = to_json_line(&r);
        assert!(line.contains(r#""emotion_side":"left","choice":"emotion_side""#));
        assert!(read_ab_records(line.as_bytes(), false).is_err());
        assert_eq!(read_ab_records(line.as_bytes(), true).unwrap(), vec![r]);
    }

    #[test]
    fn garbage_line_is_malformed() {
        assert!(matches!(
            read_calibration_records("{not json}\n".as_bytes()),
            Err(Error::MalformedRecord { line: 1, .. })
        ));
    }
}
