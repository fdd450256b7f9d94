//! Sweep configuration, execution and CSV/JSON output.

pub mod config;
pub mod fixture;
pub mod output;
pub mod sweep;

pub use config::{Format, GridSpec, Mode, SweepConfig, TimeGrid};
pub use fixture::{calibrate, check_against, fixture_dir, Band, Fixture, FIXTURE_DIR_ENV};
pub use output::{write_csv, write_json, write_report};
pub use sweep::{run, Cell, ReportHeader, SweepReport};
