//! Calibration and A/B study analysis.

pub mod anova;
pub mod calibrate;
pub mod dist;
pub mod records;
pub mod report;
pub mod tally;

pub use anova::{effect_size_class, rm_anova, rm_anova_cells, AnovaResult, CellTable, EffectSize, MissingCells};
pub use calibrate::{calibrate_presets, Aggregator};
pub use records::{
    append_record, read_ab_records, read_calibration_records, AbRecord, CalibrationRecord, Choice,
};
pub use tally::{ab_tally, AbRow, AbTally};
