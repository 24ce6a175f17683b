use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::OutputFormat;
use crate::error::{Error, Result};
use crate::hilbert::FockCutoffs;
use crate::model::{EffectiveParams, ModelParams};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Column {
            name: name.into(),
            unit: unit.into(),
        }
    }

    pub fn header(&self) -> String {
        format!("{}[{}]", self.name, self.unit)
    }
}

/// Everything needed to rerun one simulation point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedPoint {
    pub label: String,
    pub model: ModelParams,
    pub effective: Option<EffectiveParams>,
    pub cutoffs: Option<FockCutoffs>,
    /// Fixed RK4 step actually used.
    pub step: Option<f64>,
    /// Samples on which a monitor breach was recorded instead of raised.
    pub flagged_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: &'static str,
    /// Sweep assignment of this run, empty without a sweep.
    pub sweep: String,
    pub points: Vec<ResolvedPoint>,
    /// Full configuration document of the run.
    pub config: String,
    pub assumptions: Vec<String>,
    pub generated_unix: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputTable {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub manifest: Manifest,
}

impl OutputTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    fn check_rectangular(&self) -> Result<()> {
        let w = self.columns.len();
        if let Some(i) = self.rows.iter().position(|r| r.len() != w) {
            return Err(Error::Shape(format!(
                "table {}: row {i} has {} values for {w} columns",
                self.name,
                self.rows[i].len()
            )));
        }
        Ok(())
    }

    /// RFC 4180 CSV with a `name[unit]` header row.
    pub fn to_csv(&self, precision: usize) -> Result<String> {
        self.check_rectangular()?;
        let mut s = self.columns.iter().map(Column::header).collect::<Vec<_>>().join(",");
        s.push_str("\r\n");
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_significant(v, precision)).collect();
            s.push_str(&cells.join(","));
            s.push_str("\r\n");
        }
        Ok(s)
    }

    /// JSON document with columns, rows and manifest. Values are rounded to
    /// `precision` significant digits, as in the CSV form; non-finite
    /// values are written as strings.
    pub fn to_json(&self, precision: usize) -> Result<String> {
        self.check_rectangular()?;
        #[derive(Serialize)]
        struct Doc<'a> {
            name: &'a str,
            columns: &'a [Column],
            rows: Vec<Vec<serde_json::Value>>,
            manifest: &'a Manifest,
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&v| json_number(v, precision)).collect())
            .collect();
        Ok(serde_json::to_string_pretty(&Doc {
            name: &self.name,
            columns: &self.columns,
            rows,
            manifest: &self.manifest,
        })?)
    }
}

fn json_number(v: f64, precision: usize) -> serde_json::Value {
    let text = format_significant(v, precision);
    match text.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
        Some(n) => serde_json::Value::Number(n),
        None => serde_json::Value::String(text),
    }
}

/// `v` rounded to `digits` significant digits, in plain notation for
/// moderate exponents and scientific notation otherwise, without trailing
/// zeros.
pub fn format_significant(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes each table to `dir` and returns the paths written. CSV tables
/// get a `<name>.manifest.json` companion.
pub fn write_tables(tables: &[OutputTable], dir: &Path, format: OutputFormat, precision: usize) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in tables {
        match format {
            OutputFormat::Csv => {
                let path = dir.join(format!("{}.csv", t.name));
                fs::write(&path, t.to_csv(precision)?)?;
                written.push(path);
                let path = dir.join(format!("{}.manifest.json", t.name));
                fs::write(&path, serde_json::to_string_pretty(&t.manifest)?)?;
                written.push(path);
            }
            OutputFormat::Json => {
                let path = dir.join(format!("{}.json", t.name));
                fs::write(&path, t.to_json(precision)?)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Plain-text listing of the tables with their sizes.
pub fn summary(tables: &[OutputTable]) -> String {
    let mut s = String::new();
    for t in tables {
        let _ = writeln!(s, "{}: {} rows x {} columns", t.name, t.rows.len(), t.columns.len());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(1.8410000000001, 12), "1.841");
        assert_eq!(format_significant(-0.000123456789, 3), "-0.000123");
        assert_eq!(format_significant(1.5e-9, 12), "1.5e-9");
        assert_eq!(format_significant(123456.0, 3), "1.23e5");
        assert_eq!(format_significant(99.99999, 3), "100");
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(f64::NAN, 12), "NaN");
        let x = std::f64::consts::PI;
        assert!((format_significant(x, 12).parse::<f64>().unwrap() - x).abs() < 1e-11);
    }

    fn table() -> OutputTable {
        OutputTable {
            name: "t".into(),
            columns: vec![Column::new("t", "1/lambda"), Column::new("P_plus", "1")],
            rows: vec![vec![0.5, 0.25], vec![1.0, 0.125]],
            manifest: Manifest {
                tool: "molcav",
                version: "0",
                scenario: "custom",
                sweep: String::new(),
                points: Vec::new(),
                config: String::new(),
                assumptions: Vec::new(),
                generated_unix: 0,
            },
        }
    }

    #[test]
    fn csv_layout() {
        assert_eq!(table().to_csv(12).unwrap(), "t[1/lambda],P_plus[1]\r\n0.5,0.25\r\n1,0.125\r\n");
        let mut bad = table();
        bad.rows[1].pop();
        assert!(bad.to_csv(12).is_err());
    }

    #[test]
    fn json_carries_the_same_numbers() {
        let v: serde_json::Value = serde_json::from_str(&table().to_json(12).unwrap()).unwrap();
        assert_eq!(v["rows"][1][1], 0.125);
        assert_eq!(v["columns"][0]["unit"], "1/lambda");
        assert_eq!(v["manifest"]["scenario"], "custom");
    }
}
