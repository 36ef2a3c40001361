//! Point-set and table serialization.
//!
//! CSV floats are written with 17 significant digits (`{:.16e}`), `.` as the
//! decimal separator and no grouping, so every value round-trips exactly.
//! The binary layout is a 16-byte header (`d`, `n` as little-endian `u64`)
//! followed by `n * d` little-endian `f64` values in row-major order.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Lossless 17-significant-digit rendering of a float.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{x:.16e}")
    }
}

/// A header plus string rows, written as CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Write `points` (row-major, `d` columns) as header-less CSV.
pub fn write_points_csv<W: Write>(writer: W, points: &[f64], d: usize) -> Result<()> {
    check_shape(points.len(), d)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in points.chunks_exact(d) {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a point set with `d` columns and `n` rows. A first line that does
/// not parse as numbers is treated as a header. Returns `(points, d)`.
pub fn read_points_csv<R: Read>(reader: R) -> Result<(Vec<f64>, usize)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut points = Vec::new();
    let mut d = None;
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if line == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("row {}: {e}", line + 1))),
        };
        match d {
            None => d = Some(row.len()),
            Some(expected) if expected != row.len() => {
                return Err(Error::DimensionMismatch {
                    expected,
                    got: row.len(),
                })
            }
            Some(_) => {}
        }
        points.extend(row);
    }
    let d = d.ok_or_else(|| Error::Parse("point set is empty".into()))?;
    if d == 0 {
        return Err(Error::Parse("point set has no columns".into()));
    }
    Ok((points, d))
}

pub fn write_points_binary<W: Write>(mut writer: W, points: &[f64], d: usize) -> Result<()> {
    check_shape(points.len(), d)?;
    let n = points.len() / d;
    writer.write_all(&(d as u64).to_le_bytes())?;
    writer.write_all(&(n as u64).to_le_bytes())?;
    for v in points {
        writer.write_all(&v.to_le_bytes())?;
    }
    writer.flush()?;
    Ok(())
}

/// Returns `(points, d)`.
pub fn read_points_binary<R: Read>(mut reader: R) -> Result<(Vec<f64>, usize)> {
    let mut word = [0u8; 8];
    reader.read_exact(&mut word)?;
    let d = u64::from_le_bytes(word) as usize;
    reader.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    if d == 0 {
        return Err(Error::Parse("binary header has d = 0".into()));
    }
    let len = n
        .checked_mul(d)
        .ok_or_else(|| Error::Parse("binary header overflows".into()))?;
    let mut points = Vec::with_capacity(len);
    for _ in 0..len {
        reader.read_exact(&mut word)?;
        points.push(f64::from_le_bytes(word));
    }
    Ok((points, d))
}

fn check_shape(len: usize, d: usize) -> Result<()> {
    if d == 0 || !len.is_multiple_of(d) {
        return Err(Error::Parse(format!("{len} values do not form rows of width {d}")));
    }
    Ok(())
}
