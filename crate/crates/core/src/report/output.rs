use std::io::Write;

use serde_json::{Map, Value};

use crate::error::Result;

use super::config::Format;
use super::sweep::SweepReport;

pub fn write_csv<W: Write>(report: &SweepReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&report.columns)?;
    for row in &report.rows {
        w.write_record(row.iter().map(|c| c.render()))?;
    }
    w.flush()?;
    Ok(())
}

/// One object: version, config echo, fixture ids, summary, then the rows.
pub fn to_json_value(report: &SweepReport) -> Result<Value> {
    let mut obj = Map::new();
    obj.insert("version".into(), Value::from(report.header.version.clone()));
    obj.insert("config".into(), serde_json::to_value(&report.header.config)?);
    obj.insert("fixtures".into(), serde_json::to_value(&report.header.fixtures)?);
    obj.insert("summary".into(), Value::Object(report.header.summary.clone()));
    obj.insert("columns".into(), serde_json::to_value(&report.columns)?);
    obj.insert("rows".into(), report.rows_json());
    Ok(Value::Object(obj))
}

pub fn write_json<W: Write>(report: &SweepReport, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &to_json_value(report)?)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_report<W: Write>(report: &SweepReport, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(report, out),
        Format::Json => write_json(report, out),
    }
}
