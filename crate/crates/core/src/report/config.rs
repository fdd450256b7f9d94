use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decay_sum::SumParams;
use crate::error::{Error, Result};
use crate::oscillator::{standard_time_grid, DEFAULT_N_TERMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Eval,
    Sum,
    Envelope,
    Nmax,
    Sharpness,
    Oscillator,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Eval => "eval",
            Mode::Sum => "sum",
            Mode::Envelope => "envelope",
            Mode::Nmax => "nmax",
            Mode::Sharpness => "sharpness",
            Mode::Oscillator => "oscillator",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "eval" => Mode::Eval,
            "sum" => Mode::Sum,
            "envelope" => Mode::Envelope,
            "nmax" => Mode::Nmax,
            "sharpness" => Mode::Sharpness,
            "oscillator" => Mode::Oscillator,
            other => return Err(Error::config("mode", format!("unknown mode `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::config("format", format!("expected csv or json, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

impl GridSpec {
    pub fn linear(min: f64, max: f64, count: usize) -> Self {
        GridSpec {
            min,
            max,
            count,
            log: false,
        }
    }

    pub fn log(min: f64, max: f64, count: usize) -> Self {
        GridSpec {
            min,
            max,
            count,
            log: true,
        }
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        if self.count < 2 {
            return Err(Error::config(
                format!("{prefix}count"),
                format!("need at least 2 points, got {}", self.count),
            ));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::config(format!("{prefix}min"), "grid bounds must be finite"));
        }
        if !(self.min < self.max) {
            return Err(Error::config(
                format!("{prefix}max"),
                format!("need min < max, got [{}, {}]", self.min, self.max),
            ));
        }
        if self.log && !(self.min > 0.0) {
            return Err(Error::config(format!("{prefix}min"), "log spacing needs min > 0"));
        }
        Ok(())
    }

    /// Grid points; the endpoints are hit exactly.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.count - 1 {
                    return self.max;
                }
                let s = i as f64 / last;
                if self.log {
                    (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + s * (self.max - self.min)
                }
            })
            .collect()
    }
}

/// Time grid for oscillator sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeGrid {
    /// `{k/64 : 0 <= k < 32}` and `{(2k+1)/16 : 0 <= k <= 7}`.
    Standard,
    Values(Vec<f64>),
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            TimeGrid::Standard => standard_time_grid(),
            TimeGrid::Values(v) => v.clone(),
        }
    }
}

impl FromStr for TimeGrid {
    type Err = Error;

    /// `standard` or a comma-separated list of times.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "standard" {
            return Ok(TimeGrid::Standard);
        }
        let values = s
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::config("t_grid", format!("bad time `{v}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TimeGrid::Values(values))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Hermite order for `eval`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u64>,
    pub x_grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<TimeGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_terms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl SweepConfig {
    pub fn new(mode: Mode, x_grid: GridSpec) -> Self {
        SweepConfig {
            mode,
            kappa: None,
            beta: None,
            y: None,
            alpha: None,
            order: None,
            x_grid,
            t_grid: None,
            n_terms: None,
            out: None,
            format: Format::Csv,
        }
    }

    pub fn with_sum_params(mut self, kappa: f64, beta: f64, y: f64) -> Self {
        self.kappa = Some(kappa);
        self.beta = Some(beta);
        self.y = Some(y);
        self
    }

    fn require(&self, value: Option<f64>, field: &'static str) -> Result<f64> {
        value.ok_or_else(|| Error::config(field, format!("required by mode {}", self.mode)))
    }

    pub fn sum_params(&self) -> Result<SumParams> {
        let kappa = self.require(self.kappa, "kappa")?;
        let beta = self.require(self.beta, "beta")?;
        let y = self.require(self.y, "y")?;
        SumParams::new(kappa, beta, y).map_err(|e| match e {
            Error::InvalidParams { field, detail } => Error::config(field, detail),
            other => other,
        })
    }

    pub fn y(&self) -> Result<f64> {
        let y = self.require(self.y, "y")?;
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::config("y", format!("must be finite and > 0, got {y}")));
        }
        Ok(y)
    }

    pub fn alpha(&self) -> Result<f64> {
        let a = self.require(self.alpha, "alpha")?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::config("alpha", format!("must be finite and > 0, got {a}")));
        }
        Ok(a)
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms.unwrap_or(DEFAULT_N_TERMS)
    }

    pub fn time_points(&self) -> Vec<f64> {
        self.t_grid.clone().unwrap_or(TimeGrid::Standard).points()
    }

    /// Checks grid shape and that the mode's parameters are present and valid.
    pub fn validate(&self) -> Result<()> {
        self.x_grid.validate("x_")?;
        match self.mode {
            Mode::Eval => {
                self.order
                    .ok_or_else(|| Error::config("order", "required by mode eval"))?;
            }
            Mode::Sum | Mode::Envelope | Mode::Sharpness => {
                self.sum_params()?;
            }
            Mode::Nmax => {
                self.y()?;
            }
            Mode::Oscillator => {
                self.alpha()?;
                if self.n_terms() == 0 {
                    return Err(Error::config("n_terms", "must be positive"));
                }
                let t = self.time_points();
                if t.is_empty() || t.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config("t_grid", "times must be finite and nonempty"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_endpoints_exact() {
        let g = GridSpec::log(15.0, 60.0, 40).points();
        assert_eq!(g.len(), 40);
        assert_eq!(g[0], 15.0);
        assert_eq!(g[39], 60.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn validation_names_field() {
        let bad = SweepConfig::new(Mode::Sum, GridSpec::linear(1.0, 2.0, 5)).with_sum_params(-1.0, 0.0, 1.0);
        match bad.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "kappa"),
            other => panic!("{other:?}"),
        }
        let grid = SweepConfig::new(Mode::Sum, GridSpec::linear(2.0, 1.0, 5)).with_sum_params(1.0, 0.0, 1.0);
        assert!(matches!(grid.validate(), Err(Error::Config { field, .. }) if field == "x_max"));
        let count = SweepConfig::new(Mode::Sum, GridSpec::linear(1.0, 2.0, 1)).with_sum_params(1.0, 0.0, 1.0);
        assert!(matches!(count.validate(), Err(Error::Config { field, .. }) if field == "x_count"));
        let osc = SweepConfig::new(Mode::Oscillator, GridSpec::linear(0.0, 8.0, 80));
        assert!(matches!(osc.validate(), Err(Error::Config { field, .. }) if field == "alpha"));
    }

    #[test]
    fn time_grid_parsing() {
        assert_eq!("standard".parse::<TimeGrid>().unwrap().points().len(), 40);
        assert_eq!("0, 0.5".parse::<TimeGrid>().unwrap(), TimeGrid::Values(vec![0.0, 0.5]));
        assert!("0,x".parse::<TimeGrid>().is_err());
    }

    fn arb_config() -> impl Strategy<Value = SweepConfig> {
        (
            prop_oneof![
                Just(Mode::Eval),
                Just(Mode::Sum),
                Just(Mode::Envelope),
                Just(Mode::Nmax),
                Just(Mode::Sharpness),
                Just(Mode::Oscillator)
            ],
            proptest::option::of(0.1f64..4.0),
            proptest::option::of(-2.0f64..2.0),
            proptest::option::of(0.05f64..3.0),
            proptest::option::of(0.05f64..3.0),
            proptest::option::of(0u64..5000),
            (-10.0f64..10.0, 0.1f64..100.0, 2usize..500, any::<bool>()),
            proptest::option::of(prop_oneof![
                Just(TimeGrid::Standard),
                proptest::collection::vec(-1.0f64..1.0, 1..5).prop_map(TimeGrid::Values)
            ]),
            proptest::option::of(1usize..2000),
            any::<bool>(),
        )
            .prop_map(
                |(mode, kappa, beta, y, alpha, order, (lo, w, count, log), t_grid, n_terms, json)| SweepConfig {
                    mode,
                    kappa,
                    beta,
                    y,
                    alpha,
                    order,
                    x_grid: GridSpec {
                        min: lo,
                        max: lo + w,
                        count,
                        log,
                    },
                    t_grid,
                    n_terms,
                    out: json.then(|| PathBuf::from("out/report.json")),
                    format: if json { Format::Json } else { Format::Csv },
                },
            )
    }

    proptest! {
        #[test]
        fn config_round_trips(cfg in arb_config()) {
            let text = serde_json::to_string(&cfg).unwrap();
            let back: SweepConfig = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
