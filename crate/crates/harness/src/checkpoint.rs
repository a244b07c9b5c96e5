//! Saved network parameters.
//!
//! Layout, all little-endian: the magic `NDUDENET`, a u32 version (1), a u32
//! layer count `L`, then `L + 1` u64 layer dimensions from input to output,
//! then for each layer its weights (fan-in major) followed by its biases as
//! f64.

use std::path::Path;

use dude_core::ndude::{Arch, NetParams};

use crate::error::{parse_err, read_file, write_file, Result};

pub const MAGIC: &[u8; 8] = b"NDUDENET";
pub const VERSION: u32 = 1;

pub fn encode(params: &NetParams) -> Vec<u8> {
    let dims = params.arch.dims();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(params.layers.len() as u32).to_le_bytes());
    for d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for layer in &params.layers {
        for v in layer.weights.iter().chain(&layer.bias) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| parse_err(self.bytes.len(), "truncated checkpoint"))?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }
}

pub fn parse(bytes: &[u8]) -> Result<NetParams> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<8>()? != MAGIC {
        return Err(parse_err(0, "bad magic"));
    }
    let version = u32::from_le_bytes(r.take()?);
    if version != VERSION {
        return Err(parse_err(8, format!("unsupported version {version}")));
    }
    let layers = u32::from_le_bytes(r.take()?) as usize;
    if layers == 0 || layers > 1024 {
        return Err(parse_err(12, "implausible layer count"));
    }
    let mut dims = Vec::with_capacity(layers + 1);
    for _ in 0..=layers {
        let at = r.pos;
        let d = u64::from_le_bytes(r.take()?);
        dims.push(usize::try_from(d).map_err(|_| parse_err(at, "dimension too large"))?);
    }
    let arch = Arch::new(dims[0], dims[1..layers].to_vec(), dims[layers])?;
    let mut params = NetParams::zeros(&arch);
    for layer in &mut params.layers {
        for v in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            *v = f64::from_le_bytes(r.take()?);
        }
    }
    if r.pos != bytes.len() {
        return Err(parse_err(r.pos, "trailing bytes"));
    }
    Ok(params)
}

pub fn save(path: &Path, params: &NetParams) -> Result<()> {
    write_file(path, &encode(params))
}

pub fn load(path: &Path) -> Result<NetParams> {
    parse(&read_file(path)?)
}
