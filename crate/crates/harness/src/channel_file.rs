//! Text description of a channel.
//!
//! ```text
//! # comments run to the end of the line
//! x_size 2
//! z_size 2
//! xhat_size 2
//! pi 0 0 0.9
//! pi 0 1 0.1
//! pi 1 0 0.1
//! pi 1 1 0.9
//! lambda 0 1 1
//! lambda 1 0 1
//! ```
//!
//! Entries not listed are zero. Without any `lambda` line the loss is
//! Hamming, which needs `xhat_size == x_size`.

use std::fmt::Write as _;
use std::path::Path;

use dude_core::channel::hamming;
use dude_core::{Channel, Matrix};

use crate::error::{read_file, HarnessError, Result};

fn config_err(line: usize, msg: impl Into<String>) -> HarnessError {
    HarnessError::Config { line, msg: msg.into() }
}

pub fn parse(text: &str) -> Result<Channel> {
    let (mut x, mut z, mut xh) = (None, None, None);
    let mut entries = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        let size = |w: &[&str]| -> Result<usize> {
            match w {
                [_, v] => v.parse().map_err(|_| config_err(line, format!("bad size {v:?}"))),
                _ => Err(config_err(line, "expected `<name> <size>`")),
            }
        };
        match words[0] {
            "x_size" => x = Some(size(&words)?),
            "z_size" => z = Some(size(&words)?),
            "xhat_size" => xh = Some(size(&words)?),
            key @ ("pi" | "lambda") => {
                let [_, i, j, v] = words[..] else {
                    return Err(config_err(line, format!("expected `{key} <row> <col> <value>`")));
                };
                let i: usize = i.parse().map_err(|_| config_err(line, "bad row index"))?;
                let j: usize = j.parse().map_err(|_| config_err(line, "bad column index"))?;
                let v: f64 = v.parse().map_err(|_| config_err(line, "bad value"))?;
                entries.push((line, key == "pi", i, j, v));
            }
            other => return Err(config_err(line, format!("unknown key {other:?}"))),
        }
    }
    let x = x.ok_or_else(|| config_err(0, "missing x_size"))?;
    let z = z.ok_or_else(|| config_err(0, "missing z_size"))?;
    let xh = xh.unwrap_or(x);
    let mut pi = Matrix::zeros(x, z);
    let mut lambda = Matrix::zeros(x, xh);
    let mut any_lambda = false;
    for (line, is_pi, i, j, v) in entries {
        let (m, cols) = if is_pi { (&mut pi, z) } else { (&mut lambda, xh) };
        if i >= x || j >= cols {
            return Err(config_err(line, format!("index ({i}, {j}) out of range")));
        }
        m[(i, j)] = v;
        any_lambda |= !is_pi;
    }
    if !any_lambda {
        if xh != x {
            return Err(config_err(0, "Hamming loss needs xhat_size == x_size"));
        }
        lambda = hamming(x);
    }
    Ok(Channel::new(pi, lambda)?)
}

pub fn load(path: &Path) -> Result<Channel> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|e| HarnessError::Parse { offset: e.utf8_error().valid_up_to(), msg: "not UTF-8".into() })?;
    parse(&text)
}

/// Serializes a channel listing every non-zero entry.
pub fn to_text(ch: &Channel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "x_size {}\nz_size {}\nxhat_size {}", ch.x_size(), ch.z_size(), ch.xhat_size());
    for (name, m) in [("pi", ch.pi()), ("lambda", ch.lambda())] {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)] != 0.0 {
                    let _ = writeln!(s, "{name} {i} {j} {:?}", m[(i, j)]);
                }
            }
        }
    }
    s
}

/// Where a channel comes from, as named on the command line or in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSource {
    Bsc(f64),
    File(std::path::PathBuf),
}

impl ChannelSource {
    pub fn build(&self) -> Result<Channel> {
        match self {
            ChannelSource::Bsc(d) => Ok(Channel::bsc(*d)?),
            ChannelSource::File(p) => load(p),
        }
    }

    /// Canonical form used in config identities.
    pub fn canonical(&self) -> String {
        match self {
            ChannelSource::Bsc(d) => format!("bsc:{d:?}"),
            ChannelSource::File(p) => format!("file:{}", p.display()),
        }
    }

    /// Crossover probability used for BER/δ, when the channel is a BSC.
    pub fn delta(&self) -> Option<f64> {
        match self {
            ChannelSource::Bsc(d) => Some(*d),
            ChannelSource::File(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_example() {
        let text = "# bsc\nx_size 2\nz_size 2\nxhat_size 2\npi 0 0 0.9\npi 0 1 0.1\npi 1 0 0.1\npi 1 1 0.9\nlambda 0 1 1\nlambda 1 0 1\n";
        assert_eq!(parse(text).unwrap(), Channel::bsc(0.1).unwrap());
        let no_lambda: String = text.lines().filter(|l| !l.starts_with("lambda")).collect::<Vec<_>>().join("\n");
        assert_eq!(parse(&no_lambda).unwrap(), Channel::bsc(0.1).unwrap());
    }

    #[test]
    fn round_trips_rectangular() {
        let pi = Matrix::from_rows(&[[0.7, 0.2, 0.1], [0.1, 0.1, 0.8]]).unwrap();
        let lambda = Matrix::from_rows(&[[0.0, 1.0, 0.5], [1.0, 0.0, 0.5]]).unwrap();
        let ch = Channel::new(pi, lambda).unwrap();
        assert_eq!(parse(&to_text(&ch)).unwrap(), ch);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("x_size 2\nz_size 2\npi 0 5 1.0\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config { line: 3, .. }));
        assert!(matches!(parse("x_size 2\nz_size 2\nfoo 1\n"), Err(HarnessError::Config { line: 3, .. })));
        assert!(matches!(parse("x_size 2\nz_size 2\npi 0 0 1\npi 1 1 0.5\n"), Err(HarnessError::Core(_))));
    }
}
