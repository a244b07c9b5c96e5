//! The set `S` of single-symbol denoisers `s: Z -> X̂`.
//!
//! Mapping `m` of the canonical enumeration sends noisy symbol `z` to digit
//! `z` of `m` written in base `|X̂|`, least significant digit first. For a
//! binary alphabet that gives `[always-0, flip, identity, always-1]`.
//!
//! Every argmin/argmax downstream breaks ties towards the smallest mapping
//! index, so this order is what makes denoiser output reproducible.

use alloc::vec::Vec;

use crate::channel::LossTables;
use crate::linalg::Matrix;
use crate::{Error, Result, Symbol, MAX_ALPHABET};

/// Default cap on `|S| = |X̂|^|Z|`.
pub const DEFAULT_MAPPING_CAP: usize = 65_536;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingSet {
    z_size: usize,
    xhat_size: usize,
    /// Row `m`, column `z` holds `s_m(z)`.
    table: Vec<Symbol>,
}

impl MappingSet {
    pub fn enumerate(z_size: usize, xhat_size: usize) -> Result<Self> {
        Self::enumerate_with_cap(z_size, xhat_size, DEFAULT_MAPPING_CAP)
    }

    pub fn enumerate_with_cap(z_size: usize, xhat_size: usize, cap: usize) -> Result<Self> {
        if z_size == 0 || xhat_size == 0 {
            return Err(Error::InvalidConfig("alphabet sizes must be positive"));
        }
        if z_size > MAX_ALPHABET || xhat_size > MAX_ALPHABET {
            return Err(Error::InvalidConfig("alphabet larger than supported"));
        }
        let size = (xhat_size as u128).checked_pow(z_size as u32).unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::SetTooLarge { size, cap });
        }
        let size = size as usize;
        let mut table = Vec::with_capacity(size * z_size);
        for m in 0..size {
            let mut rest = m;
            for _ in 0..z_size {
                table.push((rest % xhat_size) as Symbol);
                rest /= xhat_size;
            }
        }
        Ok(MappingSet { z_size, xhat_size, table })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.table.len() / self.z_size
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn xhat_size(&self) -> usize {
        self.xhat_size
    }

    /// `s_m` as a lookup row indexed by noisy symbol.
    #[inline]
    pub fn row(&self, m: usize) -> &[Symbol] {
        &self.table[m * self.z_size..(m + 1) * self.z_size]
    }

    /// `s_m(z)` without range checks beyond slice indexing.
    #[inline]
    pub fn map(&self, m: usize, z: Symbol) -> Symbol {
        self.table[m * self.z_size + z as usize]
    }

    pub fn apply(&self, m: usize, z: Symbol) -> Result<Symbol> {
        if m >= self.len() {
            return Err(Error::IndexOutOfRange { index: m, limit: self.len() });
        }
        if z as usize >= self.z_size {
            return Err(Error::IndexOutOfRange { index: z as usize, limit: self.z_size });
        }
        Ok(self.map(m, z))
    }

    /// Index of the mapping with the given lookup row.
    pub fn index_of(&self, row: &[Symbol]) -> Option<usize> {
        (0..self.len()).find(|&m| self.row(m) == row)
    }

    /// The "say what you see" mapping, when `Z` embeds into `X̂`.
    pub fn identity_index(&self) -> Option<usize> {
        if self.xhat_size < self.z_size {
            return None;
        }
        let row: Vec<Symbol> = (0..self.z_size).map(|z| z as Symbol).collect();
        self.index_of(&row)
    }

    /// Drops every mapping whose estimated-loss column is dominated by
    /// another one: at least as large for every `z` and strictly larger for
    /// some. Relative order is preserved; exact duplicates keep the first.
    ///
    /// `tables` must have been computed for `self`. Loss tables have to be
    /// recomputed for the returned set.
    pub fn prune_dominated(&self, tables: &LossTables) -> MappingSet {
        let l = tables.l();
        let n = self.len();
        let dominated = |s: usize| {
            (0..n).any(|t| {
                if t == s {
                    return false;
                }
                let mut le = true;
                let mut strict = false;
                for z in 0..self.z_size {
                    let (a, b) = (l[(z, t)], l[(z, s)]);
                    if a > b {
                        le = false;
                        break;
                    }
                    if a < b {
                        strict = true;
                    }
                }
                le && (strict || t < s)
            })
        };
        let mut table = Vec::new();
        for s in 0..n {
            if !dominated(s) {
                table.extend_from_slice(self.row(s));
            }
        }
        MappingSet { z_size: self.z_size, xhat_size: self.xhat_size, table }
    }
}

/// `r_(x,z)[s_m] = L(z, m) - Λ(x, s_m(z))`.
pub fn per_symbol_regret(
    x: Symbol,
    z: Symbol,
    m: usize,
    set: &MappingSet,
    tables: &LossTables,
    lambda: &Matrix,
) -> Result<f64> {
    let xhat = set.apply(m, z)?;
    if x as usize >= lambda.rows() {
        return Err(Error::IndexOutOfRange { index: x as usize, limit: lambda.rows() });
    }
    Ok(tables.l()[(z as usize, m)] - lambda[(x as usize, xhat as usize)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;
    use std::collections::BTreeSet;

    #[test]
    fn binary_order() {
        let s = MappingSet::enumerate(2, 2).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.row(0), &[0, 0]);
        assert_eq!(s.row(1), &[1, 0]);
        assert_eq!(s.row(2), &[0, 1]);
        assert_eq!(s.row(3), &[1, 1]);
        assert_eq!(s.identity_index(), Some(2));
    }

    #[test]
    fn constants_for_single_letter_noise() {
        let s = MappingSet::enumerate(1, 3).unwrap();
        assert_eq!(s.len(), 3);
        for m in 0..3 {
            assert_eq!(s.row(m), &[m as u8]);
        }
    }

    #[test]
    fn quaternary_set_is_distinct() {
        let s = MappingSet::enumerate(4, 4).unwrap();
        assert_eq!(s.len(), 256);
        let rows: BTreeSet<&[u8]> = (0..256).map(|m| s.row(m)).collect();
        assert_eq!(rows.len(), 256);
        // 27 = 3 + 2*4 + 1*16 -> digits [3, 2, 1, 0]
        assert_eq!(s.apply(27, 2).unwrap(), 1);
        for m in 0..256 {
            assert_eq!(s.index_of(s.row(m)), Some(m));
        }
    }

    #[test]
    fn apply_checks_range() {
        let s = MappingSet::enumerate(2, 2).unwrap();
        assert_eq!(s.apply(2, 1).unwrap(), 1);
        assert_eq!(s.apply(1, 1).unwrap(), 0);
        assert!(matches!(s.apply(4, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(s.apply(0, 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            MappingSet::enumerate(17, 2),
            Err(Error::SetTooLarge { size: 131_072, cap: DEFAULT_MAPPING_CAP })
        ));
        assert!(MappingSet::enumerate(16, 2).is_ok());
        assert!(matches!(MappingSet::enumerate(200, 200), Err(Error::SetTooLarge { .. })));
    }

    #[test]
    fn regret_examples() {
        let ch = Channel::bsc(0.1).unwrap();
        let s = MappingSet::enumerate(2, 2).unwrap();
        let t = ch.estimated_loss(&s).unwrap();
        let r = per_symbol_regret(0, 0, 2, &s, &t, ch.lambda()).unwrap();
        assert!((r - 0.1).abs() < 1e-12);
        let r = per_symbol_regret(0, 0, 0, &s, &t, ch.lambda()).unwrap();
        assert!((r + 0.125).abs() < 1e-12);
    }

    #[test]
    fn pruning_drops_flip_under_bsc() {
        let ch = Channel::bsc(0.1).unwrap();
        let s = MappingSet::enumerate(2, 2).unwrap();
        let t = ch.estimated_loss(&s).unwrap();
        let p = s.prune_dominated(&t);
        assert_eq!(p.len(), 3);
        assert_eq!(p.row(0), &[0, 0]);
        assert_eq!(p.row(1), &[0, 1]);
        assert_eq!(p.row(2), &[1, 1]);
    }
}
