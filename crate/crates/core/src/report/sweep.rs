use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::decay_sum::{
    assemble_certificate, direct_sum_detailed, envelope, find_nmax, sharpness_point, SharpnessPoint, SumParams,
};
use crate::error::{Error, Result};
use crate::hermite::hermite_exact;
use crate::oscillator::{decay_certificate, evolve, HermiteCoefficients, TestFunction};
use crate::signed_log::SignedLog;

use super::config::{Mode, SweepConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn from_log(v: SignedLog) -> (Cell, Cell) {
        (Cell::Float(v.to_f64()), Cell::Float(v.logmag()))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }

    /// 17 significant digits for floats; the CSV form.
    pub fn render(&self) -> String {
        match self {
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) if v.is_nan() => "nan".to_string(),
            Cell::Float(v) if *v > 0.0 => "inf".to_string(),
            Cell::Float(_) => "-inf".to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    /// Finite floats become numbers; non-finite ones keep their CSV spelling.
    pub fn to_json(&self) -> Value {
        match self {
            Cell::Float(v) if v.is_finite() => Value::from(*v),
            Cell::Float(_) => Value::String(self.render()),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Report header: everything needed to reproduce the rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub version: String,
    pub config: SweepConfig,
    /// Names of stored fixtures calibrated with this exact configuration.
    pub fixtures: Vec<String>,
    /// Whole-sweep quantities (bands, slopes, certified constants).
    pub summary: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub header: ReportHeader,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl SweepReport {
    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)
            .map(|c| c.into_iter().map(|v| v.as_f64().unwrap_or(f64::NAN)).collect())
    }

    /// Rows whose error column is nonempty.
    pub fn failed_rows(&self) -> usize {
        let last = self.columns.len() - 1;
        self.rows
            .iter()
            .filter(|r| !matches!(&r[last], Cell::Text(s) if s.is_empty()))
            .count()
    }

    pub fn rows_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.to_json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

fn ok() -> Cell {
    Cell::Text(String::new())
}

fn failed(width: usize, e: &Error) -> Vec<Cell> {
    let mut row = vec![Cell::Float(f64::NAN); width];
    row.push(Cell::Text(e.to_string()));
    row
}

/// Runs `f` on each index inside a pool of `jobs` threads (0: one per core).
fn parallel_rows<F>(count: usize, jobs: usize, f: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(usize) -> Vec<Cell> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(&f).collect()))
}

fn eval_rows(cfg: &SweepConfig, x: &[f64], jobs: usize) -> Result<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    let n = cfg
        .order
        .ok_or_else(|| Error::config("order", "required by mode eval"))?;
    let rows = parallel_rows(x.len(), jobs, |i| {
        let h = hermite_exact(n, x[i]);
        let (v, l) = Cell::from_log(h);
        vec![
            Cell::Float(x[i]),
            Cell::Int(n as i64),
            v,
            l,
            Cell::Int(i64::from(h.sign())),
            ok(),
        ]
    })?;
    Ok((vec!["x", "n", "h", "log_abs_h", "sign", "error"], rows))
}

/// `ln` of the envelope, with the `x = 0` limit taken when `beta = 1/4`.
fn log_envelope_or_limit(x: f64, p: &SumParams) -> Result<f64> {
    if p.x_power() == 0.0 {
        return Ok(-p.kappa() * x * x * p.y().tanh() / 2.0);
    }
    Ok(envelope(x, p)?.logmag())
}

fn sum_rows(cfg: &SweepConfig, x: &[f64], jobs: usize) -> Result<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    let p = cfg.sum_params()?;
    let rows = parallel_rows(x.len(), jobs, |i| {
        let out = direct_sum_detailed(x[i], &p);
        let (v, l) = Cell::from_log(out.value);
        let ratio = match log_envelope_or_limit(x[i], &p) {
            Ok(le) => Cell::Float((out.value.logmag() - le).exp()),
            Err(_) => Cell::Float(f64::NAN),
        };
        vec![
            Cell::Float(x[i]),
            v,
            l,
            Cell::Int(out.n_stop as i64),
            Cell::Int(out.max_term_n as i64),
            ratio,
            ok(),
        ]
    })?;
    Ok((
        vec!["x", "sum", "log_sum", "n_stop", "max_term_n", "ratio", "error"],
        rows,
    ))
}

fn envelope_rows(cfg: &SweepConfig, x: &[f64], jobs: usize) -> Result<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    let p = cfg.sum_params()?;
    let rows = parallel_rows(x.len(), jobs, |i| match envelope(x[i], &p) {
        Ok(env) => {
            let (v, l) = Cell::from_log(env);
            vec![
                Cell::Float(x[i]),
                Cell::Float(p.x_power() * x[i].ln()),
                Cell::Float(-p.kappa() * x[i] * x[i] * p.y().tanh() / 2.0),
                v,
                l,
                ok(),
            ]
        }
        Err(e) => {
            let mut r = failed(5, &e);
            r[0] = Cell::Float(x[i]);
            r
        }
    })?;
    Ok((
        vec!["x", "x_power", "gaussian_log", "envelope", "log_envelope", "error"],
        rows,
    ))
}

fn nmax_rows(cfg: &SweepConfig, x: &[f64], jobs: usize) -> Result<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    let y = cfg.y()?;
    let rows = parallel_rows(x.len(), jobs, |i| match find_nmax(x[i], y) {
        Ok(p) => vec![
            Cell::Float(x[i]),
            Cell::Float(p.n_max),
            Cell::Float(p.n_max_asymptotic()),
            Cell::Float(p.n_max - p.n_max_asymptotic()),
            Cell::Float(p.a_max),
            Cell::Float(p.peak_deviation()),
            Cell::Float(p.lambda),
            Cell::Int(p.truncation_n as i64),
            Cell::Int(p.iterations as i64),
            ok(),
        ],
        Err(e) => {
            let mut r = failed(9, &e);
            r[0] = Cell::Float(x[i]);
            r
        }
    })?;
    Ok((
        vec![
            "x",
            "n_max",
            "n_max_asymptotic",
            "n_max_deviation",
            "a_max",
            "peak_deviation",
            "lambda",
            "truncation_n",
            "iterations",
            "error",
        ],
        rows,
    ))
}

fn sharpness_rows(
    cfg: &SweepConfig,
    x: &[f64],
    jobs: usize,
    summary: &mut Map<String, Value>,
) -> Result<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    let p = cfg.sum_params()?;
    let points: Vec<Result<SharpnessPoint>> = {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::config("jobs", e.to_string()))?;
        pool.install(|| x.par_iter().map(|&xi| sharpness_point(xi, &p)).collect())
    };
    let rows = points
        .iter()
        .zip(x)
        .map(|(pt, &xi)| match pt {
            Ok(pt) => {
                let (lo, hi) = pt.window.map_or((-1, -1), |(a, b)| (a as i64, b as i64));
                vec![
                    Cell::Float(xi),
                    Cell::Float(pt.log_sum),
                    Cell::Float(pt.log_envelope),
                    Cell::Float(pt.ratio()),
                    Cell::Float(pt.log_ratio()),
                    Cell::Float(pt.n_max),
                    Cell::Float(pt.lambda),
                    Cell::Int(pt.n_stop as i64),
                    Cell::Int(lo),
                    Cell::Int(hi),
                    Cell::Float(pt.window_fraction()),
                    Cell::Float(pt.window_ratio()),
                    ok(),
                ]
            }
            Err(e) => {
                let mut r = failed(12, e);
                r[0] = Cell::Float(xi);
                r
            }
        })
        .collect();
    let good: Vec<SharpnessPoint> = points.into_iter().filter_map(|p| p.ok()).collect();
    if good.len() >= 2 {
        let cert = assemble_certificate(p, good);
        summary.insert("ratio_min".into(), Value::from(cert.ratio_min));
        summary.insert("ratio_max".into(), Value::from(cert.ratio_max));
        summary.insert("slope".into(), Value::from(cert.slope));
        summary.insert("window_ratio_min".into(), Value::from(cert.window_ratio_min));
        let fmin = cert.window_fractions.iter().copied().fold(f64::INFINITY, f64::min);
        summary.insert("window_fraction_min".into(), Value::from(fmin));
    }
    Ok((
        vec![
            "x",
            "log_sum",
            "log_envelope",
            "ratio",
            "log_ratio",
            "n_max",
            "lambda",
            "n_stop",
            "window_lo",
            "window_hi",
            "window_fraction",
            "window_ratio",
            "error",
        ],
        rows,
    ))
}

fn json_f64(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else {
        Value::String(Cell::Float(v).render())
    }
}

fn oscillator_rows(
    cfg: &SweepConfig,
    x: &[f64],
    jobs: usize,
    summary: &mut Map<String, Value>,
) -> Result<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    let alpha = cfg.alpha()?;
    let t = cfg.time_points();
    let columns = vec![
        "x",
        "t",
        "re",
        "im",
        "abs",
        "log_abs",
        "log_tail",
        "weighted",
        "log_weighted",
        "error",
    ];
    let f = TestFunction::hardy_gaussian(alpha);
    let certified: Result<HermiteCoefficients> = f.expand(cfg.n_terms()).and_then(|c| c.certify(alpha));
    let coeffs = match certified {
        Ok(c) => c,
        Err(e) => {
            let rows = x
                .iter()
                .flat_map(|&xi| t.iter().map(move |&ti| (xi, ti)))
                .map(|(xi, ti)| {
                    let mut r = failed(9, &e);
                    r[0] = Cell::Float(xi);
                    r[1] = Cell::Float(ti);
                    r
                })
                .collect();
            return Ok((columns, rows));
        }
    };
    let cert = {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::config("jobs", e.to_string()))?;
        pool.install(|| decay_certificate(&coeffs, alpha, x, &t))?
    };
    summary.insert("test_function".into(), serde_json::to_value(&f)?);
    summary.insert("truncation_n".into(), Value::from(cert.truncation_n));
    summary.insert("vemuri_constant".into(), json_f64(cert.vemuri_constant));
    summary.insert("sup_weighted".into(), json_f64(cert.sup_weighted));
    summary.insert("sup_bound".into(), json_f64(cert.sup_bound));
    summary.insert("tail_weighted_sup".into(), json_f64(cert.tail_weighted_sup));
    summary.insert("majorant_weighted_sup".into(), json_f64(cert.majorant_weighted_sup));
    summary.insert("triangle_holds".into(), Value::from(cert.triangle_holds));

    let rate = alpha.tanh() * std::f64::consts::PI;
    let pairs: Vec<(f64, f64)> = x.iter().flat_map(|&xi| t.iter().map(move |&ti| (xi, ti))).collect();
    let rows = parallel_rows(pairs.len(), jobs, |i| {
        let (xi, ti) = pairs[i];
        let ev = evolve(&coeffs, xi, ti);
        let v = ev.value();
        let la = ev.log_abs();
        let lw = la + rate * xi * xi;
        vec![
            Cell::Float(xi),
            Cell::Float(ti),
            Cell::Float(v.re),
            Cell::Float(v.im),
            Cell::Float(v.norm()),
            Cell::Float(la),
            Cell::Float(ev.tail.logmag()),
            Cell::Float(lw.exp()),
            Cell::Float(lw),
            ok(),
        ]
    })?;
    Ok((columns, rows))
}

/// Evaluates the configured sweep. Per-point numeric failures land in the
/// `error` column; configuration problems are returned as errors.
pub fn run(cfg: &SweepConfig, jobs: usize) -> Result<SweepReport> {
    cfg.validate()?;
    let x = cfg.x_grid.points();
    let mut summary = Map::new();
    let (columns, rows) = match cfg.mode {
        Mode::Eval => eval_rows(cfg, &x, jobs)?,
        Mode::Sum => sum_rows(cfg, &x, jobs)?,
        Mode::Envelope => envelope_rows(cfg, &x, jobs)?,
        Mode::Nmax => nmax_rows(cfg, &x, jobs)?,
        Mode::Sharpness => sharpness_rows(cfg, &x, jobs, &mut summary)?,
        Mode::Oscillator => oscillator_rows(cfg, &x, jobs, &mut summary)?,
    };
    let mut report = SweepReport {
        header: ReportHeader {
            version: crate::VERSION.to_string(),
            config: cfg.clone(),
            fixtures: super::fixture::matching_fixtures(cfg),
            summary,
        },
        columns,
        rows,
    };
    append_band_summary(&mut report);
    Ok(report)
}

fn append_band_summary(report: &mut SweepReport) {
    let column = match report.header.config.mode {
        Mode::Sum => "ratio",
        Mode::Nmax => "peak_deviation",
        _ => return,
    };
    if let Some(v) = report.column_f64(column) {
        let finite: Vec<f64> = v.into_iter().filter(|x| x.is_finite()).collect();
        if !finite.is_empty() {
            let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            report.header.summary.insert(format!("{column}_min"), Value::from(lo));
            report.header.summary.insert(format!("{column}_max"), Value::from(hi));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::config::GridSpec;

    #[test]
    fn envelope_x_power_vanishes_at_quarter() {
        let cfg = SweepConfig::new(Mode::Envelope, GridSpec::log(1.0, 100.0, 17)).with_sum_params(2.0, 0.25, 0.7);
        let r = run(&cfg, 2).unwrap();
        assert!(r.column_f64("x_power").unwrap().iter().all(|v| *v == 0.0));
        assert_eq!(r.failed_rows(), 0);
    }

    #[test]
    fn failures_stay_in_rows() {
        let cfg = SweepConfig::new(Mode::Envelope, GridSpec::linear(-1.0, 1.0, 3)).with_sum_params(1.0, 0.0, 1.0);
        let r = run(&cfg, 1).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.failed_rows(), 2);
    }

    #[test]
    fn oscillator_rows_are_grid_product() {
        let mut cfg = SweepConfig::new(Mode::Oscillator, GridSpec::linear(0.0, 2.0, 5));
        cfg.alpha = Some(0.5);
        cfg.n_terms = Some(60);
        cfg.t_grid = Some("0,0.25,0.5".parse().unwrap());
        let r = run(&cfg, 0).unwrap();
        assert_eq!(r.rows.len(), 15);
        assert_eq!(r.failed_rows(), 0);
        assert!(r.header.summary["sup_weighted"].as_f64().unwrap().is_finite());
    }

    #[test]
    fn output_independent_of_jobs() {
        let cfg = SweepConfig::new(Mode::Sum, GridSpec::linear(0.0, 30.0, 31)).with_sum_params(1.0, 0.25, 0.5);
        let a = run(&cfg, 1).unwrap();
        let b = run(&cfg, 4).unwrap();
        assert_eq!(a, b);
    }
}
