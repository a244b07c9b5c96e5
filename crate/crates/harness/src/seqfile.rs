//! Raw symbol sequences.
//!
//! Layout: the magic `DSEQ`, a version byte (1), the alphabet size as one
//! byte, two reserved zero bytes, the sequence length as a little-endian u64,
//! then one byte per symbol.

use std::path::Path;

use dude_core::Symbol;

use crate::error::{parse_err, read_file, write_file, Result};

pub const MAGIC: &[u8; 4] = b"DSEQ";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    pub alphabet: usize,
    pub symbols: Vec<Symbol>,
}

pub fn encode(seq: &Sequence) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + seq.symbols.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(seq.alphabet as u8);
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(seq.symbols.len() as u64).to_le_bytes());
    out.extend_from_slice(&seq.symbols);
    out
}

pub fn parse(bytes: &[u8]) -> Result<Sequence> {
    if bytes.len() < HEADER_LEN {
        return Err(parse_err(bytes.len(), "truncated header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(parse_err(0, "bad magic"));
    }
    if bytes[4] != VERSION {
        return Err(parse_err(4, format!("unsupported version {}", bytes[4])));
    }
    let alphabet = bytes[5] as usize;
    if alphabet < 2 {
        return Err(parse_err(5, "alphabet must have at least two symbols"));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("eight bytes"));
    let body = &bytes[HEADER_LEN..];
    if (body.len() as u64) != len {
        return Err(parse_err(bytes.len(), format!("header says {len} symbols, found {}", body.len())));
    }
    if let Some(pos) = body.iter().position(|&s| s as usize >= alphabet) {
        return Err(parse_err(HEADER_LEN + pos, "symbol outside the alphabet"));
    }
    Ok(Sequence { alphabet, symbols: body.to_vec() })
}

pub fn load(path: &Path) -> Result<Sequence> {
    parse(&read_file(path)?)
}

pub fn save(path: &Path, seq: &Sequence) -> Result<()> {
    write_file(path, &encode(seq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::HarnessError;

    #[test]
    fn round_trip_and_layout() {
        let s = Sequence { alphabet: 3, symbols: vec![0, 2, 1, 1] };
        let bytes = encode(&s);
        assert_eq!(&bytes[..8], b"DSEQ\x01\x03\x00\x00");
        assert_eq!(bytes[8], 4);
        assert_eq!(parse(&bytes).unwrap(), s);
    }

    #[test]
    fn rejects_bad_input() {
        let mut bytes = encode(&Sequence { alphabet: 2, symbols: vec![0, 1, 1] });
        assert!(parse(&bytes[..bytes.len() - 1]).is_err());
        bytes[17] = 2;
        assert!(matches!(parse(&bytes), Err(HarnessError::Parse { offset: 17, .. })));
        assert!(parse(b"DSEQ").is_err());
    }
}
