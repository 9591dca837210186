//! FLD1 field files: one JSON header line, then little-endian f64 samples.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::field::RealField;
use super::grid::Grid;
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "FLD1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldHeader {
    pub format: String,
    pub dims: Vec<usize>,
    pub lengths: Vec<f64>,
    pub name: String,
}

pub fn encode_field(f: &RealField, name: &str) -> Result<Vec<u8>> {
    let header = FieldHeader {
        format: FORMAT_TAG.to_string(),
        dims: f.grid().dims().to_vec(),
        lengths: f.grid().lengths().to_vec(),
        name: name.to_string(),
    };
    let mut out = serde_json::to_vec(&header)?;
    out.push(b'\n');
    out.reserve(8 * f.values().len());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Decodes a field; reuses `grid` when it matches the header.
pub fn decode_field(bytes: &[u8], grid: Option<&Grid>) -> Result<(RealField, String)> {
    let mut reader = BufReader::new(bytes);
    let mut line = String::new();
    reader
        .read_line(&mut line)
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?;
    if !line.ends_with('\n') {
        return Err(Error::Format("header line is not newline-terminated".into()));
    }
    let header: FieldHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if header.format != FORMAT_TAG {
        return Err(Error::Format(format!(
            "unexpected format tag '{}'",
            header.format
        )));
    }
    let grid = match grid {
        Some(g) if g.dims() == header.dims.as_slice() && g.lengths() == header.lengths.as_slice() => {
            g.clone()
        }
        _ => Grid::new(&header.dims, &header.lengths)?,
    };
    let mut payload = Vec::new();
    reader
        .read_to_end(&mut payload)
        .map_err(|e| Error::Format(format!("unreadable payload: {e}")))?;
    let expected = 8 * grid.len();
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((RealField::new(&grid, values)?, header.name))
}

pub fn write_field(path: impl AsRef<Path>, f: &RealField, name: &str) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_field(f, name)?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn read_field(path: impl AsRef<Path>, grid: Option<&Grid>) -> Result<(RealField, String)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_field(&bytes, grid)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn ensure_dir(path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}
