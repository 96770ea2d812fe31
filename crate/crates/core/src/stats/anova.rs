//! One-way repeated-measures ANOVA with emotion as the within-subject factor.
//!
//! Raw records are first averaged into subject x emotion cells. No
//! sphericity correction is applied. The reported effect size is partial
//! eta squared, `SS_effect / (SS_effect + SS_error)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::control::{Emotion, Parameter};
use crate::error::{Error, Result};
use crate::stats::dist::f_survival;
use crate::stats::records::CalibrationRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EffectSize {
    Small,
    Medium,
    Large,
}

/// Cohen's bands for eta squared: `[0, 0.06)` Small, `[0.06, 0.14)`
/// Medium, `>= 0.14` Large.
pub fn effect_size_class(eta2: f64) -> EffectSize {
    if eta2 >= 0.14 {
        EffectSize::Large
    } else if eta2 >= 0.06 {
        EffectSize::Medium
    } else {
        EffectSize::Small
    }
}

/// What to do when a subject has no record for one of the emotion levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingCells {
    #[default]
    Reject,
    /// Drop subjects without a complete row.
    DropSubject,
    /// Fill the cell with the mean of that emotion over the other subjects.
    ImputeLevelMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub parameter: String,
    pub f: f64,
    pub p: f64,
    pub eta2: f64,
    pub label: EffectSize,
    pub df_effect: f64,
    pub df_error: f64,
    pub ss_effect: f64,
    pub ss_error: f64,
    pub subjects: usize,
    pub levels: Vec<Emotion>,
}

/// Subject x level matrix of cell means, rows ordered by subject id.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTable {
    pub subjects: Vec<String>,
    pub levels: Vec<Emotion>,
    pub cells: Vec<Vec<f64>>,
}

pub fn cell_table(
    records: &[CalibrationRecord],
    parameter: Parameter,
    missing: MissingCells,
) -> Result<CellTable> {
    let mut sums: BTreeMap<&str, BTreeMap<Emotion, (f64, usize)>> = BTreeMap::new();
    let mut levels = BTreeSet::new();
    for r in records {
        if r.target_emotion == Emotion::Neutral {
            continue;
        }
        levels.insert(r.target_emotion);
        let cell = sums
            .entry(r.subject_id.as_str())
            .or_default()
            .entry(r.target_emotion)
            .or_insert((0.0, 0));
        cell.0 += r.chosen.get(parameter);
        cell.1 += 1;
    }
    let levels: Vec<Emotion> = levels.into_iter().collect();

    let mut subjects = Vec::new();
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for (subject, by_level) in &sums {
        let row: Vec<Option<f64>> = levels
            .iter()
            .map(|l| by_level.get(l).map(|(s, n)| s / *n as f64))
            .collect();
        if let Some(j) = row.iter().position(Option::is_none) {
            match missing {
                MissingCells::Reject => {
                    return Err(Error::InsufficientData(format!(
                        "subject `{subject}` has no {} record",
                        levels[j]
                    )))
                }
                MissingCells::DropSubject => continue,
                MissingCells::ImputeLevelMean => {}
            }
        }
        subjects.push(subject.to_string());
        rows.push(row);
    }

    let level_means: Vec<Option<f64>> = (0..levels.len())
        .map(|j| {
            let present: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
            (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
        })
        .collect();
    let cells = rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .enumerate()
                .map(|(j, v)| {
                    v.or(level_means[j]).ok_or_else(|| {
                        Error::InsufficientData(format!("no subject has a {} record", levels[j]))
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CellTable {
        subjects,
        levels,
        cells,
    })
}

/// Repeated-measures ANOVA over a complete cell table.
pub fn rm_anova_cells(table: &CellTable, parameter: &str) -> Result<AnovaResult> {
    let n = table.subjects.len();
    let k = table.levels.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 subjects, have {n}"
        )));
    }
    if k < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 emotion levels, have {k}"
        )));
    }
    let cells = &table.cells;
    let grand = cells.iter().flatten().sum::<f64>() / (n * k) as f64;
    let subject_means: Vec<f64> = cells.iter().map(|r| r.iter().sum::<f64>() / k as f64).collect();
    let level_means: Vec<f64> = (0..k)
        .map(|j| cells.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();

    let ss_effect = n as f64 * level_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    // Interaction residual computed directly, so it cannot go negative.
    let ss_error: f64 = cells
        .iter()
        .zip(&subject_means)
        .flat_map(|(row, sm)| {
            row.iter()
                .zip(&level_means)
                .map(move |(x, lm)| (x - sm - lm + grand).powi(2))
        })
        .sum();
    let ss_total: f64 = cells.iter().flatten().map(|x| (x - grand).powi(2)).sum();

    let df_effect = (k - 1) as f64;
    let df_error = ((k - 1) * (n - 1)) as f64;
    // Sums of squares below this are rounding residue of exactly-zero
    // variation.
    let floor = 1e-24 * (ss_total + grand * grand * (n * k) as f64).max(f64::MIN_POSITIVE);

    let (f, p, eta2) = if ss_effect <= floor {
        (0.0, 1.0, 0.0)
    } else if ss_error <= floor {
        return Err(Error::InsufficientData(
            "residual variance is zero; the F statistic is unbounded".into(),
        ));
    } else {
        let f = (ss_effect / df_effect) / (ss_error / df_error);
        (f, f_survival(f, df_effect, df_error), ss_effect / (ss_effect + ss_error))
    };
    Ok(AnovaResult {
        parameter: parameter.to_string(),
        f,
        p,
        eta2,
        label: effect_size_class(eta2),
        df_effect,
        df_error,
        ss_effect,
        ss_error,
        subjects: n,
        levels: table.levels.clone(),
    })
}

pub fn rm_anova(
    records: &[CalibrationRecord],
    parameter: Parameter,
    missing: MissingCells,
) -> Result<AnovaResult> {
    let table = cell_table(records, parameter, missing)?;
    rm_anova_cells(&table, parameter.name())
}
