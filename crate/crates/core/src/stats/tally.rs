use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::dist::binomial_two_sided;
use crate::stats::records::{AbRecord, Choice};

/// One condition row of the preference table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbRow {
    pub trials: u64,
    pub prefer_emotion: u64,
    pub prefer_neutral: u64,
    /// Integer percentages that always sum to 100 (0/0 for an empty row).
    pub pct_emotion: u32,
    pub pct_neutral: u32,
    /// Two-sided exact binomial test against 50%; `None` without trials.
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbTally {
    pub correct: AbRow,
    pub wrong: AbRow,
}

/// `round(100 * part / whole)` with halves rounded up, in integers.
fn percent_half_up(part: u64, whole: u64) -> u32 {
    ((200 * part + whole) / (2 * whole)) as u32
}

/// Rounds the smaller cell half-up and gives the larger one the remainder.
pub fn split_percentages(a: u64, b: u64) -> (u32, u32) {
    let total = a + b;
    if total == 0 {
        return (0, 0);
    }
    if a <= b {
        let pa = percent_half_up(a, total);
        (pa, 100 - pa)
    } else {
        let pb = percent_half_up(b, total);
        (100 - pb, pb)
    }
}

fn row<'a>(records: impl Iterator<Item = &'a AbRecord>) -> AbRow {
    let (mut emotion, mut neutral) = (0u64, 0u64);
    for r in records {
        match r.choice {
            Choice::EmotionSide => emotion += 1,
            Choice::NeutralSide => neutral += 1,
        }
    }
    let trials = emotion + neutral;
    let (pct_emotion, pct_neutral) = split_percentages(emotion, neutral);
    AbRow {
        trials,
        prefer_emotion: emotion,
        prefer_neutral: neutral,
        pct_emotion,
        pct_neutral,
        p_value: (trials > 0).then(|| binomial_two_sided(emotion, trials, 0.5)),
    }
}

pub fn ab_tally(records: &[AbRecord]) -> Result<AbTally> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no A/B records to tally".into()));
    }
    Ok(AbTally {
        correct: row(records.iter().filter(|r| r.is_correct_emotion)),
        wrong: row(records.iter().filter(|r| !r.is_correct_emotion)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentages_sum_to_hundred() {
        assert_eq!(split_percentages(167, 25), (87, 13));
        assert_eq!(split_percentages(46, 146), (24, 76));
        assert_eq!(split_percentages(1, 1), (50, 50));
        assert_eq!(split_percentages(0, 9), (0, 100));
        // 1/8 = 12.5% rounds up to 13, the other cell absorbs it.
        assert_eq!(split_percentages(1, 7), (13, 87));
        assert_eq!(split_percentages(7, 1), (87, 13));
        for a in 0..60 {
            for b in 0..60 {
                if a + b > 0 {
                    let (x, y) = split_percentages(a, b);
                    assert_eq!(x + y, 100);
                }
            }
        }
    }

    #[test]
    fn empty_is_an_error() {
        assert!(ab_tally(&[]).is_err());
    }
}
