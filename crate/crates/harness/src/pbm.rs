//! Netpbm bitmaps (P1 plain and P4 packed).
//!
//! A black pixel (`1` in the file) becomes symbol 1, white becomes 0.

use std::path::Path;

use dude_core::Grid;

use crate::error::{parse_err, read_file, write_file, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbmFormat {
    Plain,
    Packed,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(parse_err(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(start, format!("{what} out of range")))
    }
}

/// Parses a P1 or P4 bitmap.
pub fn parse(bytes: &[u8]) -> Result<Grid> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(parse_err(0, "missing netpbm magic number"));
    }
    let format = match bytes[1] {
        b'1' => PbmFormat::Plain,
        b'4' => PbmFormat::Packed,
        b'2' | b'3' | b'5' | b'6' | b'7' => {
            return Err(HarnessError::UnsupportedFormat(format!("P{} is not a bitmap", bytes[1] as char)))
        }
        _ => return Err(parse_err(1, "unknown netpbm magic number")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let cols = cur.number("width")?;
    let rows = cur.number("height")?;
    if cols == 0 || rows == 0 {
        return Err(parse_err(cur.pos, "empty image"));
    }
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| parse_err(cur.pos, "image too large"))?;
    let mut cells = Vec::with_capacity(count);
    match format {
        PbmFormat::Plain => {
            while cells.len() < count {
                cur.skip_space();
                match bytes.get(cur.pos) {
                    Some(b'0') => cells.push(0),
                    Some(b'1') => cells.push(1),
                    Some(_) => return Err(parse_err(cur.pos, "expected 0 or 1")),
                    None => return Err(parse_err(cur.pos, "truncated pixel data")),
                }
                cur.pos += 1;
            }
        }
        PbmFormat::Packed => {
            match bytes.get(cur.pos) {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                _ => return Err(parse_err(cur.pos, "expected whitespace before raster")),
            }
            let stride = cols.div_ceil(8);
            let need = stride * rows;
            if bytes.len() - cur.pos < need {
                return Err(parse_err(bytes.len(), "truncated pixel data"));
            }
            for r in 0..rows {
                let row = &bytes[cur.pos + r * stride..cur.pos + (r + 1) * stride];
                for c in 0..cols {
                    cells.push((row[c / 8] >> (7 - c % 8)) & 1);
                }
            }
        }
    }
    Ok(Grid::new(rows, cols, cells)?)
}

pub fn load(path: &Path) -> Result<Grid> {
    parse(&read_file(path)?)
}

/// Serializes a binary grid. Symbols other than 0 and 1 are rejected.
pub fn encode(grid: &Grid, format: PbmFormat) -> Result<Vec<u8>> {
    if let Some(&bad) = grid.cells().iter().find(|&&s| s > 1) {
        return Err(HarnessError::Invalid(format!("symbol {bad} cannot be stored in a bitmap")));
    }
    let (rows, cols) = (grid.rows(), grid.cols());
    let mut out = match format {
        PbmFormat::Plain => format!("P1\n{cols} {rows}\n").into_bytes(),
        PbmFormat::Packed => format!("P4\n{cols} {rows}\n").into_bytes(),
    };
    for r in 0..rows {
        let row = &grid.cells()[r * cols..(r + 1) * cols];
        match format {
            PbmFormat::Plain => {
                for (c, &v) in row.iter().enumerate() {
                    out.push(b'0' + v);
                    // Netpbm asks for lines of at most 70 characters.
                    out.push(if c + 1 == cols || c % 34 == 33 { b'\n' } else { b' ' });
                }
            }
            PbmFormat::Packed => {
                for chunk in row.chunks(8) {
                    let mut byte = 0u8;
                    for (bit, &v) in chunk.iter().enumerate() {
                        byte |= v << (7 - bit);
                    }
                    out.push(byte);
                }
            }
        }
    }
    Ok(out)
}

pub fn save(path: &Path, grid: &Grid, format: PbmFormat) -> Result<()> {
    write_file(path, &encode(grid, format)?)
}
