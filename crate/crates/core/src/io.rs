//! Matrix file formats.
//!
//! Binary: little-endian header of two u64 counts (rows, cols) followed by
//! `rows * cols` f64 words in column-major order. CSV: one matrix row per
//! line, comma separated. Point-set files for the kernels are ordinary
//! matrices whose rows are the points.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Binary,
    Csv,
}

impl MatrixFormat {
    /// Guesses from the extension: `.csv` is text, everything else binary.
    pub fn from_path(path: &Path) -> MatrixFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Binary,
        }
    }
}

impl std::str::FromStr for MatrixFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "bin" | "binary" => Ok(MatrixFormat::Binary),
            "csv" => Ok(MatrixFormat::Csv),
            other => Err(format!("unknown matrix format `{other}` (expected bin or csv)")),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CoreError {
    CoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_matrix(path: &Path, m: &DenseMatrix, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Binary => write_binary(path, m),
        MatrixFormat::Csv => write_csv(path, m),
    }
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<DenseMatrix> {
    match format {
        MatrixFormat::Binary => read_binary(path),
        MatrixFormat::Csv => read_csv(path),
    }
}

fn write_binary(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| io_err(path, e));
    put(&(m.rows() as u64).to_le_bytes())?;
    put(&(m.cols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        put(&v.to_le_bytes())?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn read_binary(path: &Path) -> Result<DenseMatrix> {
    let mut r = BufReader::new(File::open(path).map_err(|e| io_err(path, e))?);
    let mut header = [0u8; 16];
    r.read_exact(&mut header).map_err(|e| io_err(path, e))?;
    let rows = u64::from_le_bytes(header[..8].try_into().unwrap());
    let cols = u64::from_le_bytes(header[8..].try_into().unwrap());
    let count = rows.checked_mul(cols).and_then(|c| usize::try_from(c).ok());
    let count = count.ok_or_else(|| CoreError::Parse {
        path: path.display().to_string(),
        line: 0,
        message: format!("header claims an implausible {rows}x{cols} matrix"),
    })?;
    let mut data = Vec::with_capacity(count);
    let mut word = [0u8; 8];
    for i in 0..count {
        r.read_exact(&mut word).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                CoreError::Parse {
                    path: path.display().to_string(),
                    line: 0,
                    message: format!("file ends after {i} of {count} words"),
                }
            } else {
                io_err(path, e)
            }
        })?;
        data.push(f64::from_le_bytes(word));
    }
    Ok(DenseMatrix::from_column_major(rows as usize, cols as usize, data))
}

fn write_csv(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    for i in 0..m.rows() {
        let mut line = String::new();
        for j in 0..m.cols() {
            if j > 0 {
                line.push(',');
            }
            // Display for f64 round-trips exactly.
            line.push_str(&format!("{}", m.get(i, j)));
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn read_csv(path: &Path) -> Result<DenseMatrix> {
    let r = BufReader::new(File::open(path).map_err(|e| io_err(path, e))?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for field in trimmed.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| CoreError::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: format!("not a number: `{}`", field.trim()),
            })?;
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CoreError::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    message: format!(
                        "row has {} fields, expected {}",
                        row.len(),
                        first.len()
                    ),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CoreError::Parse {
            path: path.display().to_string(),
            line: 0,
            message: "no data rows".to_string(),
        });
    }
    Ok(DenseMatrix::from_rows(&rows))
}
