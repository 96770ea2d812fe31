use std::collections::BTreeMap;

use crate::control::{ControlVector, Emotion, Parameter};
use crate::error::{Error, Result};
use crate::pipeline::EmotionPreset;
use crate::stats::records::CalibrationRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregator {
    /// Median of per-subject means.
    #[default]
    Median,
    /// Mean of per-subject means.
    Mean,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

fn round2(v: f64) -> f64 {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Aggregates chosen vectors into one preset per calibrated emotion,
/// rounded to two decimals. Every emotion in `Emotion::CALIBRATED` must
/// have at least one record.
pub fn calibrate_presets(records: &[CalibrationRecord], aggregator: Aggregator) -> Result<Vec<EmotionPreset>> {
    let mut by_emotion: BTreeMap<Emotion, BTreeMap<&str, Vec<[f64; 6]>>> = BTreeMap::new();
    for r in records {
        by_emotion
            .entry(r.target_emotion)
            .or_default()
            .entry(r.subject_id.as_str())
            .or_default()
            .push(r.chosen.to_array());
    }
    Emotion::CALIBRATED
        .into_iter()
        .map(|emotion| {
            let subjects = by_emotion
                .get(&emotion)
                .ok_or_else(|| Error::InsufficientData(format!("no records for {emotion}")))?;
            let subject_means: Vec<[f64; 6]> = subjects
                .values()
                .map(|vs| {
                    let mut m = [0.0; 6];
                    for v in vs {
                        for (a, b) in m.iter_mut().zip(v) {
                            *a += b;
                        }
                    }
                    m.map(|s| s / vs.len() as f64)
                })
                .collect();
            let mut out = [0.0; 6];
            for p in Parameter::ALL {
                let mut column: Vec<f64> = subject_means.iter().map(|m| m[p as usize]).collect();
                let agg = match aggregator {
                    Aggregator::Median => median(&mut column).expect("non-empty"),
                    Aggregator::Mean => column.iter().sum::<f64>() / column.len() as f64,
                };
                out[p as usize] = round2(agg);
            }
            Ok(EmotionPreset {
                emotion,
                vector: ControlVector::from_array(out)?,
            })
        })
        .collect()
}
