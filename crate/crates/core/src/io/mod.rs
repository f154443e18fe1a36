//! CSV output, experiment manifests and unit parsing.
//!
//! Frequencies in files and on the command line are in Hz; times accept an
//! `ms` or `s` suffix (a bare number is seconds). Both are converted to the
//! crate's internal rad/s and seconds on the way in.

pub mod csv;
pub mod manifest;

use std::path::PathBuf;

use thiserror::Error;

pub use self::csv::{read_sweep_csv, read_table_csv, write_sweep_csv, write_table_csv, CsvSchema, SweepTable, Table};
pub use manifest::{
    builtin_manifest, load_manifest, parse_manifest, ExperimentManifest, SweepKind, SweepScale, SweepSpec,
    BUILTIN_MANIFESTS,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "BLOCHSR_OUT_DIR";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot access {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration error: {0}")]
    ConfigParse(String),
    #[error("experiment `{experiment}` failed validation: {}", fields.join("; "))]
    ValidationFailed { experiment: String, fields: Vec<String> },
    #[error("malformed CSV {path}: {message}")]
    MalformedCsv { path: PathBuf, message: String },
}

impl IoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::IoFailure {
            path: path.into(),
            source,
        }
    }
}

/// Parses `"18ms"`, `"2.5 s"` or `"0.036"` into seconds.
pub fn parse_time(text: &str) -> Result<f64, String> {
    let t = text.trim();
    // Dividing by 1000 (not multiplying by 1e-3) keeps "18ms" == 0.018.
    let (number, per_second) = if let Some(n) = t.strip_suffix("ms") {
        (n, 1e3)
    } else if let Some(n) = t.strip_suffix('s') {
        (n, 1.0)
    } else {
        (t, 1.0)
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("invalid time `{text}` (expected e.g. `18ms` or `2.5s`)"))?;
    if !value.is_finite() {
        return Err(format!("invalid time `{text}`"));
    }
    Ok(value / per_second)
}

/// Default output directory: `$BLOCHSR_OUT_DIR` or the working directory.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_suffixes() {
        assert_eq!(parse_time("18ms").unwrap(), 18e-3);
        assert_eq!(parse_time("2.5s").unwrap(), 2.5);
        assert_eq!(parse_time(" 45.5 ms ").unwrap(), 45.5e-3);
        assert_eq!(parse_time("0.036").unwrap(), 0.036);
        assert!(parse_time("18 minutes").is_err());
        assert!(parse_time("ms").is_err());
        assert!(parse_time("infs").is_err());
    }
}
