//! Calibration fixtures: frozen sweep output plus the empirical band that
//! later runs must stay inside.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

use super::config::{Format, Mode, SweepConfig};
use super::sweep::{run, SweepReport};

pub const FIXTURE_DIR_ENV: &str = "HERMITE_DECAY_FIXTURE_DIR";

/// Multiplicative slack on ratio bands.
pub const RATIO_SLACK: f64 = 2.0;
/// Multiplicative slack on `max |A(n_max) + x^2 tanh(y)/2|`.
pub const PEAK_SLACK: f64 = 1.5;

pub fn fixture_dir() -> PathBuf {
    match std::env::var_os(FIXTURE_DIR_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures")),
    }
}

pub fn fixture_path(name: &str) -> PathBuf {
    fixture_dir().join(format!("{name}.json"))
}

/// Admissible range of one report column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub column: String,
    pub observed_min: f64,
    pub observed_max: f64,
    pub lo: f64,
    pub hi: f64,
    pub slack: f64,
}

impl Band {
    fn calibrate(mode: Mode, report: &SweepReport) -> Result<Band> {
        let column = match mode {
            Mode::Sharpness | Mode::Sum => "ratio",
            Mode::Nmax => "peak_deviation",
            other => {
                return Err(Error::config(
                    "mode",
                    format!("calibrate supports sharpness, nmax and sum, not {other}"),
                ))
            }
        };
        let values = report.column_f64(column).expect("column exists for mode");
        let observed_min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let observed_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi, slack) = match mode {
            Mode::Nmax => {
                let c = PEAK_SLACK * observed_min.abs().max(observed_max.abs());
                (-c, c, PEAK_SLACK)
            }
            _ => (observed_min / RATIO_SLACK, observed_max * RATIO_SLACK, RATIO_SLACK),
        };
        Ok(Band {
            column: column.to_string(),
            observed_min,
            observed_max,
            lo,
            hi,
            slack,
        })
    }

    /// Indices of values outside `[lo, hi]` (non-finite values count as outside).
    pub fn violations(&self, values: &[f64]) -> Vec<usize> {
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| !(**v >= self.lo && **v <= self.hi))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub version: String,
    pub config: SweepConfig,
    pub band: Band,
    pub summary: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Value,
}

/// The part of a config that determines the rows.
fn normalized(cfg: &SweepConfig) -> SweepConfig {
    let mut c = cfg.clone();
    c.out = None;
    c.format = Format::Csv;
    c
}

impl Fixture {
    pub fn from_report(name: &str, report: &SweepReport) -> Result<Fixture> {
        let failed = report.failed_rows();
        if failed > 0 {
            return Err(Error::PointFailures { count: failed });
        }
        let config = normalized(&report.header.config);
        Ok(Fixture {
            name: name.to_string(),
            version: report.header.version.clone(),
            band: Band::calibrate(config.mode, report)?,
            config,
            summary: report.header.summary.clone(),
            columns: report.columns.iter().map(|c| c.to_string()).collect(),
            rows: report.rows_json(),
        })
    }

    pub fn load(path: &Path) -> Result<Fixture> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_pretty_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Band test on a fresh report of the same mode.
    pub fn check_band(&self, report: &SweepReport) -> Result<()> {
        let values = report
            .column_f64(&self.band.column)
            .ok_or_else(|| Error::FixtureMismatch(format!("report has no column `{}`", self.band.column)))?;
        let bad = self.band.violations(&values);
        if let Some(&i) = bad.first() {
            return Err(Error::FixtureMismatch(format!(
                "{} of {} value(s) of `{}` outside [{:e}, {:e}]; first at row {i}: {:e}",
                bad.len(),
                values.len(),
                self.band.column,
                self.band.lo,
                self.band.hi,
                values[i]
            )));
        }
        Ok(())
    }

    /// Full regression test: same config, byte-identical rows, values in band.
    pub fn check(&self, report: &SweepReport) -> Result<()> {
        if normalized(&report.header.config) != self.config {
            return Err(Error::FixtureMismatch(format!(
                "fixture `{}` was calibrated for a different configuration",
                self.name
            )));
        }
        let fresh = serde_json::to_string(&report.rows_json())?;
        let frozen = serde_json::to_string(&self.rows)?;
        if fresh != frozen {
            let first = report
                .rows_json()
                .as_array()
                .zip(self.rows.as_array())
                .and_then(|(a, b)| a.iter().zip(b).position(|(r, s)| r != s));
            return Err(Error::FixtureMismatch(format!(
                "rows differ from fixture `{}` (first differing row: {})",
                self.name,
                first.map_or("count".to_string(), |i| i.to_string())
            )));
        }
        self.check_band(report)
    }
}

/// Runs the sweep and writes `<fixture dir>/<name>.json`.
pub fn calibrate(cfg: &SweepConfig, name: &str, force: bool, jobs: usize) -> Result<(Fixture, PathBuf)> {
    if !matches!(cfg.mode, Mode::Sharpness | Mode::Nmax | Mode::Sum) {
        return Err(Error::config(
            "mode",
            format!("calibrate supports sharpness, nmax and sum, not {}", cfg.mode),
        ));
    }
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(Error::config("fixture", format!("invalid fixture name `{name}`")));
    }
    let path = fixture_path(name);
    if path.exists() && !force {
        return Err(Error::FixtureExists(path));
    }
    let report = run(cfg, jobs)?;
    let fixture = Fixture::from_report(name, &report)?;
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(&path, fixture.to_pretty_string()?)?;
    Ok((fixture, path))
}

/// Loads a fixture by name and checks a report against it.
pub fn check_against(name: &str, report: &SweepReport) -> Result<Fixture> {
    let path = fixture_path(name);
    if !path.exists() {
        return Err(Error::config("fixture", format!("no fixture at {}", path.display())));
    }
    let fixture = Fixture::load(&path)?;
    fixture.check(report)?;
    Ok(fixture)
}

/// Names of fixtures in the fixture directory calibrated with `cfg`.
pub fn matching_fixtures(cfg: &SweepConfig) -> Vec<String> {
    let target = normalized(cfg);
    let Ok(entries) = fs::read_dir(fixture_dir()) else {
        return Vec::new();
    };
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .filter_map(|p| Fixture::load(&p).ok())
        .filter(|f| f.config == target)
        .map(|f| f.name)
        .collect();
    names.sort();
    names
}
