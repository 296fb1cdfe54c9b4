//! Scenario configuration, SNR sweeps and result export.

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{Allocation, ExsObjective, ScenarioConfig};
pub use output::{emit_csv, format_sig6, read_csv, write_csv, write_gnuplot, CSV_HEADER};
pub use sweep::{run_sweep, run_sweep_on, snr_to_power, SweepResult, SweepRow};
