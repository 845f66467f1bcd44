//! Matrix files and report output.
//!
//! Binary layout: `b"ALSM"`, version byte `0x01`, little-endian `u64` rows,
//! `u64` columns, then the entries as little-endian `f64`, row-major. CSV is
//! headerless and comma-separated.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use als_core::DenseMatrix;
use serde::Serialize;

pub const MAGIC: &[u8; 4] = b"ALSM";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    /// `.csv` is CSV, anything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Binary,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: row {row}, column {col}: {message}")]
    Cell {
        path: PathBuf,
        row: usize,
        col: usize,
        message: String,
    },
    #[error("{path}: row {row} has {found} columns, expected {expected}")]
    Ragged {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<DenseMatrix, IoError> {
    match format {
        MatrixFormat::Csv => read_csv(path),
        MatrixFormat::Binary => read_binary(path),
    }
}

pub fn write_matrix(path: &Path, a: &DenseMatrix, format: MatrixFormat) -> Result<(), IoError> {
    match format {
        MatrixFormat::Csv => write_csv(path, a),
        MatrixFormat::Binary => write_binary(path, a),
    }
}

fn read_csv(path: &Path) -> Result<DenseMatrix, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format_err(path, e.to_string()))?;
    let mut data = Vec::new();
    let mut d = 0;
    let mut n = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        if row == 0 {
            d = record.len();
        } else if record.len() != d {
            return Err(IoError::Ragged {
                path: path.to_path_buf(),
                row,
                expected: d,
                found: record.len(),
            });
        }
        for (col, field) in record.iter().enumerate() {
            let cell = |message: String| IoError::Cell {
                path: path.to_path_buf(),
                row,
                col,
                message,
            };
            let v: f64 = field.parse().map_err(|_| cell(format!("`{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(cell(format!("non-finite value `{field}`")));
            }
            data.push(v);
        }
        n += 1;
    }
    if n == 0 || d == 0 {
        return Err(format_err(path, "empty matrix"));
    }
    DenseMatrix::new(n, d, data).map_err(|e| format_err(path, e.to_string()))
}

fn write_csv(path: &Path, a: &DenseMatrix) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", line.join(",")).map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

fn read_binary(path: &Path) -> Result<DenseMatrix, IoError> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path).map_err(io_err(path))?)
        .read_to_end(&mut bytes)
        .map_err(io_err(path))?;
    if bytes.len() < 21 || &bytes[..4] != MAGIC {
        return Err(format_err(path, "missing ALSM magic"));
    }
    if bytes[4] != VERSION {
        return Err(format_err(path, format!("unsupported version {}", bytes[4])));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
    let (n, d) = (word(5), word(13));
    let expected = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(21));
    if expected != Some(bytes.len() as u64) {
        return Err(format_err(
            path,
            format!("{n}x{d} matrix needs {expected:?} bytes, file has {}", bytes.len()),
        ));
    }
    if n == 0 || d == 0 {
        return Err(format_err(path, "empty matrix"));
    }
    let (n, d) = (n as usize, d as usize);
    let mut data = Vec::with_capacity(n * d);
    for (k, chunk) in bytes[21..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        if !v.is_finite() {
            return Err(IoError::Cell {
                path: path.to_path_buf(),
                row: k / d,
                col: k % d,
                message: format!("non-finite value {v}"),
            });
        }
        data.push(v);
    }
    DenseMatrix::new(n, d, data).map_err(|e| format_err(path, e.to_string()))
}

fn write_binary(path: &Path, a: &DenseMatrix) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let mut put = |b: &[u8]| out.write_all(b).map_err(io_err(path));
    put(MAGIC)?;
    put(&[VERSION])?;
    put(&(a.nrows() as u64).to_le_bytes())?;
    put(&(a.ncols() as u64).to_le_bytes())?;
    for v in a.data() {
        put(&v.to_le_bytes())?;
    }
    out.flush().map_err(io_err(path))
}

/// Pretty-printed JSON.
pub fn write_report<T: Serialize>(path: &Path, report: &T) -> Result<(), IoError> {
    let out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    serde_json::to_writer_pretty(out, report).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })
}
