//! Chordal distance, ν-gap and parameter-error summaries.

mod chordal;
mod errors;
mod nugap;

pub use chordal::{chordal_distance, chordal_distance_siso};
pub use errors::{loglog_slope, normalized_param_error};
pub use nugap::{nu_gap, nu_gap_auto, nu_gap_with, FrequencyGrid, GapResult, NuGapOptions};
