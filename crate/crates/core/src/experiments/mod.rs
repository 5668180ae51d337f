//! Monte Carlo harnesses and persistence of channels, nets and reports.

mod concentration;
pub mod io;
mod sweep;

pub use concentration::{run_concentration_trial, ConcentrationReport, StatSummary};
pub use sweep::{run_randomizing_sweep, CellOutcome, CellReport, SweepConfig, SweepReport};

/// Stream id of trial `trial` within work item `item`: `(item + 1)·2³² + trial`.
pub fn item_stream(item: u64, trial: u64) -> u64 {
    ((item + 1) << 32).wrapping_add(trial)
}
