//! Human-readable tables for analysis output.

use std::fmt::Write;

use crate::control::Parameter;
use crate::pipeline::EmotionPreset;
use crate::stats::anova::AnovaResult;
use crate::stats::tally::{AbRow, AbTally};

pub fn anova_table(results: &[AnovaResult]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<10} {:>10} {:>12} {:>8} {:>8}  {}",
        "parameter", "F", "p", "eta2", "df", "effect"
    )
    .unwrap();
    for r in results {
        writeln!(
            out,
            "{:<10} {:>10.3} {:>12.3e} {:>8.3} {:>8}  {:?}",
            r.parameter,
            r.f,
            r.p,
            r.eta2,
            format!("{}/{}", r.df_effect, r.df_error),
            r.label
        )
        .unwrap();
    }
    out
}

pub fn preset_table(presets: &[EmotionPreset]) -> String {
    let mut out = format!("{:<10}", "");
    for p in presets {
        write!(out, " {:>8}", p.emotion.name()).unwrap();
    }
    out.push('\n');
    for param in Parameter::ALL {
        write!(out, "{:<10}", param.name()).unwrap();
        for p in presets {
            write!(out, " {:>8.2}", p.vector.get(param)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn tally_table(tally: &AbTally) -> String {
    let line = |name: &str, r: &AbRow| {
        let p = r
            .p_value
            .map(|p| format!("{p:.3e}"))
            .unwrap_or_else(|| "-".into());
        format!(
            "{:<16} {:>6}% ({:>4}) {:>6}% ({:>4}) {:>6} {:>10}\n",
            name, r.pct_emotion, r.prefer_emotion, r.pct_neutral, r.prefer_neutral, r.trials, p
        )
    };
    let mut out = format!(
        "{:<16} {:>15} {:>15} {:>6} {:>10}\n",
        "", "prefer emotion", "prefer neutral", "n", "p"
    );
    out.push_str(&line("correct emotion", &tally.correct));
    out.push_str(&line("wrong emotion", &tally.wrong));
    out
}
