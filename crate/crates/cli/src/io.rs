//! CSV and JSON file formats.
//!
//! Time series are written as `t,value` with `t` counting from 0; kernels as
//! `lag,value` with signed lags. Values carry 17 significant digits so that
//! a write/read cycle is exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use residence_core::{Kernel, TimeSeries};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{io_err, CliError, Result};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(text.as_bytes()).map_err(io_err(path))
}

/// Writes a CSV table; every row must have as many cells as the header.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let fail = |e: csv::Error| CliError::Invalid(format!("{}: {e}", path.display()));
        w.write_record(header).map_err(fail)?;
        for row in rows {
            w.write_record(row).map_err(fail)?;
        }
        w.flush().map_err(io_err(path))?;
    }
    write_text(path, &String::from_utf8(out).expect("csv output is utf-8"))
}

pub fn write_series(path: &Path, values: &[f64]) -> Result<()> {
    let rows: Vec<Vec<String>> = values
        .iter()
        .enumerate()
        .map(|(t, v)| vec![t.to_string(), fmt_f64(*v)])
        .collect();
    write_table(path, &["t", "value"], &rows)
}

pub fn write_kernel(path: &Path, k: &Kernel) -> Result<()> {
    let rows: Vec<Vec<String>> = k
        .lags()
        .zip(k.values())
        .map(|(lag, v)| vec![lag.to_string(), fmt_f64(*v)])
        .collect();
    write_table(path, &["lag", "value"], &rows)
}

fn read_pairs(path: &Path, index_name: &str) -> Result<Vec<(i64, f64, u64)>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let parse_err = |line: u64, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.len() != 2 || &header[0] != index_name || &header[1] != "value" {
        return Err(parse_err(
            1,
            format!(
                "expected header `{index_name},value`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        let index: i64 = record[0]
            .parse()
            .map_err(|_| parse_err(line, format!("invalid {index_name} {:?}", &record[0])))?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| parse_err(line, format!("invalid value {:?}", &record[1])))?;
        if !value.is_finite() {
            return Err(parse_err(
                line,
                format!("value must be finite, got {value}"),
            ));
        }
        out.push((index, value, line));
    }
    Ok(out)
}

/// Reads a `t,value` file; `t` must run 0, 1, 2, ...
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let pairs = read_pairs(path, "t")?;
    let mut values = Vec::with_capacity(pairs.len());
    for (expected, (t, v, line)) in pairs.into_iter().enumerate() {
        if t != expected as i64 {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected t = {expected}, found {t}"),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "no data rows".into(),
        });
    }
    Ok(TimeSeries::new(values)?)
}

/// Reads a `lag,value` file covering lags `-K/2 ..= K/2 - 1` in order.
pub fn read_kernel(path: &Path) -> Result<Kernel> {
    let pairs = read_pairs(path, "lag")?;
    let len = pairs.len();
    if len < 2 || len % 2 != 0 {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("kernel needs an even number (>= 2) of rows, found {len}"),
        });
    }
    let first = -((len / 2) as i64);
    let mut values = Vec::with_capacity(len);
    for (i, (lag, v, line)) in pairs.into_iter().enumerate() {
        let expected = first + i as i64;
        if lag != expected {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected lag {expected}, found {lag}"),
            });
        }
        values.push(v);
    }
    Ok(Kernel::new(values)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}
