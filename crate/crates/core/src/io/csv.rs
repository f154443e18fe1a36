//! Comma-separated output with `#` comment lines.
//!
//! ```text
//! # t12,s,response_eta_over_seq
//! 5.0000000000000000e-3,1.6508...e-1
//! ...
//! # extremum,kind=max,location=2.5263...e-2,value=5.0000000000000000e-1
//! ```
//!
//! The first line names the columns. For sweeps it reads
//! `control,unit,response_eta_over_seq`: the swept quantity, its unit
//! (`s` or `Hz`) and η/s_eq. Numbers use 17 significant digits, so parsing a
//! file and rendering it again reproduces the text exactly. Trailing `#`
//! lines carry metadata as comma-separated `key=value` fields.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::params::rad_to_hz;
use crate::sr_analysis::{Control, ExtremumKind, SweepResult};

use super::IoError;

/// Name of the response column in sweep files.
pub const RESPONSE_COLUMN: &str = "response_eta_over_seq";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    /// Fields of the header line.
    pub header: Vec<String>,
    /// Number of values per data row.
    pub data_columns: usize,
}

impl CsvSchema {
    /// `control,unit,response_eta_over_seq` with two data columns.
    pub fn sweep(control: Control) -> Self {
        let unit = if control.is_frequency() { "Hz" } else { "s" };
        CsvSchema {
            header: vec![
                control.name().to_string(),
                unit.to_string(),
                RESPONSE_COLUMN.to_string(),
            ],
            data_columns: 2,
        }
    }

    /// One header field per data column.
    pub fn columns(names: &[&str]) -> Self {
        CsvSchema {
            header: names.iter().map(|s| s.to_string()).collect(),
            data_columns: names.len(),
        }
    }

    pub fn header_line(&self) -> String {
        format!("# {}", self.header.join(","))
    }

    pub fn is_sweep(&self) -> bool {
        self.data_columns == 2 && self.header.len() == 3 && self.header[2] == RESPONSE_COLUMN
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: CsvSchema,
    pub rows: Vec<Vec<f64>>,
    /// Trailing comment lines without the leading `# `.
    pub metadata: Vec<String>,
}

pub type SweepTable = Table;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Table {
    pub fn new(schema: CsvSchema) -> Self {
        Table {
            schema,
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    /// Sweep in file units (s or Hz) with η/s_eq responses.
    pub fn from_sweep(r: &SweepResult) -> Self {
        let to_file = |x: f64| if r.control.is_frequency() { rad_to_hz(x) } else { x };
        let schema = CsvSchema::sweep(r.control);
        let rows = r
            .grid
            .iter()
            .zip(r.normalized())
            .map(|(&x, y)| vec![to_file(x), y])
            .collect();
        let s = r.base.s_eq.abs();
        let kind = match r.extremum.kind {
            ExtremumKind::Max => "max",
            ExtremumKind::None => "none",
        };
        let value = if s > 0.0 { r.extremum.value / s } else { 0.0 };
        let mut metadata = vec![format!(
            "extremum,kind={kind},location={},value={}",
            num(to_file(r.extremum.location)),
            num(value)
        )];
        let b = &r.base;
        let mut base = format!("base,s_eq={}", num(b.s_eq));
        if r.control != Control::Omega1 {
            let _ = write!(base, ",rabi_hz={}", num(rad_to_hz(b.omega1)));
        }
        match r.control {
            Control::T12 { ratio } => {
                let _ = write!(base, ",t1_over_t2={}", num(ratio));
            }
            Control::T1 => {
                let _ = write!(base, ",t2_s={}", num(b.t2));
            }
            Control::T2 => {
                let _ = write!(base, ",t1_s={}", num(b.t1));
            }
            Control::Omega1 | Control::Detuning => {
                let _ = write!(base, ",t1_s={},t2_s={}", num(b.t1), num(b.t2));
            }
        }
        metadata.push(base);
        metadata.push(format!("physical,{}", r.physical));
        Table { schema, rows, metadata }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.schema.data_columns);
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.schema.header_line();
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| num(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for m in &self.metadata {
            out.push_str("# ");
            out.push_str(m);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or("missing `# ` header line")?;
        let fields: Vec<String> = header.split(',').map(str::to_string).collect();
        let data_columns = if fields.len() == 3 && fields[2] == RESPONSE_COLUMN {
            2
        } else {
            fields.len()
        };
        let mut table = Table::new(CsvSchema {
            header: fields,
            data_columns,
        });
        for (i, line) in lines.enumerate() {
            if let Some(meta) = line.strip_prefix("# ") {
                table.metadata.push(meta.to_string());
                continue;
            }
            if !table.metadata.is_empty() {
                return Err(format!("line {}: data row after metadata", i + 2));
            }
            let row = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("line {}: {e}", i + 2))?;
            if row.len() != data_columns {
                return Err(format!(
                    "line {}: expected {data_columns} values, found {}",
                    i + 2,
                    row.len()
                ));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    /// Looks up `key=value` in the metadata line starting with `tag`.
    pub fn metadata_value(&self, tag: &str, key: &str) -> Option<f64> {
        self.metadata
            .iter()
            .filter_map(|m| m.strip_prefix(tag).and_then(|r| r.strip_prefix(',')))
            .flat_map(|r| r.split(','))
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| *k == key)
            .and_then(|(_, v)| v.parse().ok())
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }
}

/// Writes `table` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_table_csv(table: &Table, path: &Path) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| IoError::io(dir, e))?;
    tmp.write_all(table.render().as_bytes())
        .and_then(|_| tmp.flush())
        .map_err(|e| IoError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| IoError::io(path, e.error))?;
    Ok(())
}

pub fn write_sweep_csv(r: &SweepResult, path: &Path) -> Result<(), IoError> {
    write_table_csv(&Table::from_sweep(r), path)
}

pub fn read_table_csv(path: &Path) -> Result<Table, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    Table::parse(&text).map_err(|message| IoError::MalformedCsv {
        path: path.to_path_buf(),
        message,
    })
}

pub fn read_sweep_csv(path: &Path) -> Result<Table, IoError> {
    let t = read_table_csv(path)?;
    if !t.schema.is_sweep() {
        return Err(IoError::MalformedCsv {
            path: path.to_path_buf(),
            message: format!("header `{}` is not a sweep header", t.schema.header_line()),
        });
    }
    Ok(t)
}
