//! Context geometry: double-sided 1-D windows and square 2-D patches around
//! each noisy symbol, and their one-hot encoding.
//!
//! A context is a tuple of cells, each a symbol or `None` for a position that
//! falls outside the data. 1-D contexts list `Z_{i-k}, ..., Z_{i-1}` followed
//! by `Z_{i+1}, ..., Z_{i+k}`. 2-D patches of odd side `l` are traversed in
//! row-major order with the center cell left out. One-hot encoding turns
//! every cell into a block of `|Z|` reals; padding becomes the all-zero block,
//! so the encoded dimension is `2k|Z|` or `(l²-1)|Z|`.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Padding {
    /// Out-of-range cells are padding; every position is denoised.
    ZeroPad,
    /// Only positions with a complete 1-D window are processed; the rest are
    /// copied through unchanged.
    SkipBoundary,
}

impl Padding {
    pub fn as_str(self) -> &'static str {
        match self {
            Padding::ZeroPad => "zero",
            Padding::SkipBoundary => "skip",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zero" | "zeropad" | "pad" => Some(Padding::ZeroPad),
            "skip" | "skipboundary" => Some(Padding::SkipBoundary),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContextShape {
    OneD { k: usize },
    TwoD { side: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ContextSpec {
    pub shape: ContextShape,
    pub z_size: usize,
    pub pad: Padding,
}

impl ContextSpec {
    pub fn one_d(k: usize, z_size: usize, pad: Padding) -> Self {
        ContextSpec { shape: ContextShape::OneD { k }, z_size, pad }
    }

    /// Square patch of odd side `side >= 3`; always zero-padded.
    pub fn two_d(side: usize, z_size: usize) -> Result<Self> {
        if side < 3 || side % 2 == 0 {
            return Err(Error::InvalidConfig("patch side must be odd and at least 3"));
        }
        Ok(ContextSpec { shape: ContextShape::TwoD { side }, z_size, pad: Padding::ZeroPad })
    }

    /// Number of cells in a context.
    pub fn context_len(&self) -> usize {
        match self.shape {
            ContextShape::OneD { k } => 2 * k,
            ContextShape::TwoD { side } => side * side - 1,
        }
    }

    pub fn encoded_dim(&self) -> usize {
        self.context_len() * self.z_size
    }

    /// Equivalent 1-D order: `k`, or `(l²-1)/2` for a patch.
    pub fn order(&self) -> usize {
        self.context_len() / 2
    }

    /// Upper bound on the Euclidean norm of an encoding.
    pub fn norm_bound(&self) -> f64 {
        libm::sqrt(self.context_len() as f64)
    }

    /// Whether position `i` of `signal` is processed under this spec.
    #[inline]
    pub fn covers(&self, signal: Signal<'_>, i: usize) -> bool {
        match (self.shape, self.pad) {
            (ContextShape::OneD { k }, Padding::SkipBoundary) => i >= k && i + k < signal.len(),
            _ => i < signal.len(),
        }
    }

    /// Number of processed positions.
    pub fn covered_count(&self, signal: Signal<'_>) -> usize {
        match (self.shape, self.pad) {
            (ContextShape::OneD { k }, Padding::SkipBoundary) => signal.len().saturating_sub(2 * k),
            _ => signal.len(),
        }
    }

    /// Checks that `signal` is usable with this spec.
    pub fn check(&self, signal: Signal<'_>) -> Result<()> {
        if let ContextShape::TwoD { .. } = self.shape {
            if signal.width() == 0 || signal.len() % signal.width() != 0 {
                return Err(Error::ShapeMismatch("2-D contexts need a rectangular signal"));
            }
        }
        if let Some(&bad) = signal.symbols().iter().find(|&&z| z as usize >= self.z_size) {
            return Err(Error::SymbolOutOfAlphabet { symbol: bad as usize, size: self.z_size });
        }
        Ok(())
    }

    /// Visits the cells of the context at `i` in canonical order.
    #[inline]
    pub fn for_each_cell<F: FnMut(Option<Symbol>)>(&self, signal: Signal<'_>, i: usize, mut f: F) {
        let z = signal.symbols();
        match self.shape {
            ContextShape::OneD { k } => {
                for d in (1..=k).rev() {
                    f(i.checked_sub(d).map(|j| z[j]));
                }
                for d in 1..=k {
                    f(z.get(i + d).copied());
                }
            }
            ContextShape::TwoD { side } => {
                let w = signal.width();
                let h = signal.len() / w;
                let (r, c) = ((i / w) as isize, (i % w) as isize);
                let half = (side / 2) as isize;
                for dr in -half..=half {
                    for dc in -half..=half {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let (rr, cc) = (r + dr, c + dc);
                        if rr < 0 || cc < 0 || rr >= h as isize || cc >= w as isize {
                            f(None);
                        } else {
                            f(Some(z[rr as usize * w + cc as usize]));
                        }
                    }
                }
            }
        }
    }

    /// Context at `i`, honouring the boundary rule.
    pub fn context(&self, signal: Signal<'_>, i: usize) -> Result<Vec<Option<Symbol>>> {
        if i >= signal.len() {
            return Err(Error::IndexOutOfRange { index: i, limit: signal.len() });
        }
        if !self.covers(signal, i) {
            return Err(Error::BoundaryViolation { position: i, k: self.order(), n: signal.len() });
        }
        let mut out = Vec::with_capacity(self.context_len());
        self.for_each_cell(signal, i, |c| out.push(c));
        Ok(out)
    }

    /// Appends the positions of the ones in the one-hot encoding at `i`.
    #[inline]
    pub fn active_indices(&self, signal: Signal<'_>, i: usize, out: &mut Vec<u32>) {
        let zs = self.z_size as u32;
        let mut block = 0u32;
        self.for_each_cell(signal, i, |c| {
            if let Some(s) = c {
                out.push(block * zs + s as u32);
            }
            block += 1;
        });
    }

    /// Appends a byte key for the context at `i`: `symbol + 1`, or 0 for padding.
    #[inline]
    pub fn key(&self, signal: Signal<'_>, i: usize, out: &mut Vec<u8>) {
        self.for_each_cell(signal, i, |c| out.push(c.map_or(0, |s| s + 1)));
    }

    pub fn encode(&self, signal: Signal<'_>, i: usize) -> Result<EncodedContext> {
        let cells = self.context(signal, i)?;
        let mut enc = one_hot(&cells, self.z_size)?;
        enc.center_index = i;
        Ok(enc)
    }
}

/// A borrowed run of noisy symbols with a raster width (`width == len` for
/// plain sequences). 1-D contexts read the symbols in raster order.
#[derive(Debug, Clone, Copy)]
pub struct Signal<'a> {
    symbols: &'a [Symbol],
    width: usize,
}

impl<'a> Signal<'a> {
    pub fn line(symbols: &'a [Symbol]) -> Self {
        Signal { symbols, width: symbols.len() }
    }

    pub fn raster(symbols: &'a [Symbol], width: usize) -> Result<Self> {
        if width == 0 || symbols.len() % width != 0 {
            return Err(Error::ShapeMismatch("raster width does not divide the length"));
        }
        Ok(Signal { symbols, width })
    }

    #[inline]
    pub fn symbols(&self) -> &'a [Symbol] {
        self.symbols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }
}

/// Row-major symbol image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    cells: Vec<Symbol>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, cells: Vec<Symbol>) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::ShapeMismatch("grid cell count does not match its shape"));
        }
        Ok(Grid { rows, cols, cells })
    }

    pub fn filled(rows: usize, cols: usize, value: Symbol) -> Self {
        Grid { rows, cols, cells: vec![value; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Symbol {
        self.cells[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Symbol) {
        self.cells[r * self.cols + c] = v;
    }

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<Symbol> {
        self.cells
    }

    pub fn signal(&self) -> Signal<'_> {
        Signal { symbols: &self.cells, width: self.cols.max(1) }
    }
}

/// `(Z_{i-k}^{i-1}, Z_{i+1}^{i+k})`.
pub fn extract_1d(
    z: &[Symbol],
    i: usize,
    k: usize,
    pad: Padding,
) -> Result<Vec<Option<Symbol>>> {
    ContextSpec::one_d(k, usize::MAX, pad).context(Signal::line(z), i)
}

/// `side×side` patch around `(r, c)` without its center, row-major, zero padded.
pub fn extract_2d(img: &Grid, r: usize, c: usize, side: usize) -> Result<Vec<Option<Symbol>>> {
    if r >= img.rows() || c >= img.cols() {
        return Err(Error::IndexOutOfRange { index: r * img.cols() + c, limit: img.cells.len() });
    }
    let spec = ContextSpec::two_d(side, usize::MAX)?;
    spec.context(img.signal(), r * img.cols() + c)
}

/// One-hot encoding of a context; padding maps to an all-zero block.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedContext {
    pub vec: Vec<f64>,
    pub center_index: usize,
}

impl EncodedContext {
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.vec.iter().map(|v| v * v).sum())
    }
}

pub fn one_hot(ctx: &[Option<Symbol>], z_size: usize) -> Result<EncodedContext> {
    let mut vec = vec![0.0; ctx.len() * z_size];
    for (j, cell) in ctx.iter().enumerate() {
        if let Some(s) = *cell {
            if s as usize >= z_size {
                return Err(Error::SymbolOutOfAlphabet { symbol: s as usize, size: z_size });
            }
            vec[j * z_size + s as usize] = 1.0;
        }
    }
    Ok(EncodedContext { vec, center_index: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_d_examples() {
        let z = [0, 1, 1];
        assert_eq!(extract_1d(&z, 1, 1, Padding::SkipBoundary).unwrap(), [Some(0), Some(1)]);
        assert_eq!(extract_1d(&z, 0, 1, Padding::ZeroPad).unwrap(), [None, Some(1)]);
        assert!(extract_1d(&z, 1, 0, Padding::ZeroPad).unwrap().is_empty());
        assert!(matches!(
            extract_1d(&z, 0, 1, Padding::SkipBoundary),
            Err(Error::BoundaryViolation { position: 0, k: 1, n: 3 })
        ));
    }

    #[test]
    fn one_d_order_is_left_then_right() {
        let z = [0, 1, 2, 3, 4];
        let c = extract_1d(&z, 2, 2, Padding::SkipBoundary).unwrap();
        assert_eq!(c, [Some(0), Some(1), Some(3), Some(4)]);
    }

    #[test]
    fn two_d_examples() {
        let img = Grid::filled(3, 3, 0);
        assert_eq!(extract_2d(&img, 1, 1, 3).unwrap(), [Some(0); 8]);
        let corner = extract_2d(&img, 0, 0, 3).unwrap();
        assert_eq!(corner.len(), 8);
        assert_eq!(corner.iter().filter(|c| c.is_none()).count(), 5);
        // Row-major, center omitted.
        let img = Grid::new(3, 3, (0..9).collect()).unwrap();
        let c = extract_2d(&img, 1, 1, 3).unwrap();
        let expect: Vec<_> = [0, 1, 2, 3, 5, 6, 7, 8].iter().map(|&v| Some(v)).collect();
        assert_eq!(c, expect);
        assert!(extract_2d(&img, 1, 1, 4).is_err());
    }

    #[test]
    fn patch_sizes_match_one_d_orders() {
        let sides = [3, 5, 7, 9, 11, 13, 15, 17, 19];
        let ks = [4, 12, 24, 40, 60, 84, 112, 144, 180];
        for (l, k) in sides.iter().zip(ks) {
            let two = ContextSpec::two_d(*l, 2).unwrap();
            let one = ContextSpec::one_d(k, 2, Padding::ZeroPad);
            assert_eq!(two.context_len(), one.context_len());
            assert_eq!(two.order(), k);
        }
    }

    #[test]
    fn one_hot_examples() {
        assert_eq!(one_hot(&[Some(0), Some(1)], 2).unwrap().vec, [1.0, 0.0, 0.0, 1.0]);
        assert_eq!(one_hot(&[None, Some(1)], 2).unwrap().vec, [0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            one_hot(&[Some(2)], 2),
            Err(Error::SymbolOutOfAlphabet { symbol: 2, size: 2 })
        ));
    }

    #[test]
    fn interior_norm_for_k60() {
        let z: Vec<u8> = (0..200).map(|i| (i % 3 == 0) as u8).collect();
        let spec = ContextSpec::one_d(60, 2, Padding::ZeroPad);
        let e = spec.encode(Signal::line(&z), 100).unwrap();
        assert_eq!(e.vec.len(), spec.encoded_dim());
        assert!((e.norm() - libm::sqrt(120.0)).abs() < 1e-12);
        assert!(spec.encode(Signal::line(&z), 3).unwrap().norm() <= spec.norm_bound());
    }

    #[test]
    fn active_indices_match_dense_encoding() {
        let img = Grid::new(4, 5, (0..20).map(|v| (v * 7 % 3) as u8).collect()).unwrap();
        let spec = ContextSpec::two_d(5, 3).unwrap();
        for i in 0..20 {
            let dense = spec.encode(img.signal(), i).unwrap().vec;
            let mut act = Vec::new();
            spec.active_indices(img.signal(), i, &mut act);
            let ones: Vec<u32> =
                dense.iter().enumerate().filter(|(_, &v)| v == 1.0).map(|(j, _)| j as u32).collect();
            assert_eq!(act, ones);
        }
    }
}
