//! Matrix and key=value file formats shared by datasets, models, and reports.
//!
//! Matrices use a one-line `rows,cols` header followed by row-major data,
//! either as little-endian `f64` bytes (binary, bit-exact round trip) or as
//! decimal text at 17 significant digits (CSV, lossless for `f64`).

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Formats one `f64` with 17 significant decimal digits, enough for an exact
/// round trip through text.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Hex SHA-256 over the little-endian bytes of a value stream. Used to
/// fingerprint parameter sets and frozen weight matrices.
pub fn digest_f64s<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for v in values {
        hasher.update(v.to_le_bytes());
    }
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn parse_header(path: &Path, line: &str) -> Result<(usize, usize)> {
    let mut parts = line.trim().split(',');
    let rows = parts
        .next()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .ok_or_else(|| parse_err(path, 1, "expected `rows,cols` header"))?;
    let cols = parts
        .next()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .ok_or_else(|| parse_err(path, 1, "expected `rows,cols` header"))?;
    if parts.next().is_some() {
        return Err(parse_err(path, 1, "expected exactly `rows,cols` in header"));
    }
    Ok((rows, cols))
}

/// Writes a matrix as binary: `rows,cols\n` then row-major little-endian f64.
pub fn save_matrix_bin(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{},{}", m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            w.write_all(&m[(r, c)].to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a matrix written by [`save_matrix_bin`].
pub fn load_matrix_bin(path: &Path) -> Result<DMatrix<f64>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let (rows, cols) = parse_header(path, &header)?;
    let mut bytes = vec![0u8; rows * cols * 8];
    r.read_exact(&mut bytes)
        .map_err(|_| parse_err(path, 2, format!("expected {} f64 values", rows * cols)))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(parse_err(path, 2, "trailing bytes after matrix data"));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

/// Writes a matrix as CSV: `rows,cols` header, one comma-separated row per line.
pub fn save_matrix_csv(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{},{}", m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt_f64(m[(r, c)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a matrix written by [`save_matrix_csv`].
pub fn load_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let file = BufReader::new(File::open(path)?);
    let mut lines = file.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))??;
    let (rows, cols) = parse_header(path, &header)?;
    let mut data = Vec::with_capacity(rows * cols);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let mut count = 0;
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                parse_err(path, lineno, format!("bad float `{}`", field.trim()))
            })?;
            data.push(v);
            count += 1;
        }
        if count != cols {
            return Err(parse_err(
                path,
                lineno,
                format!("expected {cols} columns, found {count}"),
            ));
        }
    }
    if data.len() != rows * cols {
        return Err(parse_err(
            path,
            1,
            format!("header promised {rows}x{cols} but file holds {} values", data.len()),
        ));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

/// Writes `key=value` lines in the given order.
pub fn save_kv(pairs: &[(String, String)], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (k, v) in pairs {
        writeln!(w, "{k}={v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn load_kv(path: &Path) -> Result<Vec<(String, String)>> {
    let file = BufReader::new(File::open(path)?);
    let mut pairs = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (k, v) = trimmed
            .split_once('=')
            .ok_or_else(|| parse_err(path, i + 1, "expected key=value"))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}
