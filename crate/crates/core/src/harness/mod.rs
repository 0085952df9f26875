//! Benchmark loops, sweeps over sampling intervals, verification reports and
//! Bode tables.

mod bode;
mod config;
mod presets;
mod sweep;
mod verify;

pub use bode::{bode_entry, cmd_bode, max_magnitude_deviation_db};
pub use config::{ArxOrders, Experiment, ExperimentConfig, Method, Profile};
pub use presets::{
    default_excitations, p4_plant, preset_catalog, scaled_pole_pattern, FilterChoice, Preset, NOISE_STD,
    PRESET_NAMES,
};
pub use sweep::{
    cmd_sweep, identify_record, realization_records, summarize, write_rows_csv, CellSummary, MethodSlope, Stats,
    SweepOutput, SweepRow, SweepSummary, CSV_HEADER,
};
pub use verify::{
    cmd_verify_covariance, cmd_verify_lemma1, CovarianceReport, CovarianceRow, CovarianceSettings, Lemma1Report,
    Lemma1Row,
};
