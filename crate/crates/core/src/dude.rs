//! Count-based sliding-window DUDE in estimated-loss form.
//!
//! For each distinct context `c` the first pass sums the estimated-loss rows
//! `L(Z_i, ·)` over the positions with `C_i = c`; the second pass applies, at
//! every position, the mapping minimizing that sum for its context. This is
//! the per-context empirical estimated-loss minimizer among all `k`-th order
//! sliding-window denoisers.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{Channel, LossTables};
use crate::context::{ContextShape, ContextSpec, Padding, Signal};
use crate::metrics::Denoised;
use crate::problem::Problem;
use crate::{Error, Result, Symbol};

/// Default cap on the number of distinct contexts.
pub const DEFAULT_CONTEXT_CAP: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct ContextEntry {
    pub count: usize,
    /// `Σ_{i: C_i = c} L(Z_i, s)` for every mapping `s`.
    pub loss: Vec<f64>,
}

/// Per-context accumulated estimated losses. Keys are the cell bytes of
/// [`ContextSpec::key`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContextStats {
    spec: ContextSpec,
    entries: BTreeMap<Vec<u8>, ContextEntry>,
    processed: usize,
}

impl ContextStats {
    pub fn spec(&self) -> &ContextSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn processed(&self) -> usize {
        self.processed
    }

    pub fn get(&self, key: &[u8]) -> Option<&ContextEntry> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], &ContextEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_slice(), v))
    }

    /// Adds another shard's statistics, e.g. from a split sequence.
    pub fn merge(&mut self, other: ContextStats) {
        self.processed += other.processed;
        for (key, entry) in other.entries {
            match self.entries.get_mut(&key) {
                Some(mine) => {
                    mine.count += entry.count;
                    for (a, b) in mine.loss.iter_mut().zip(&entry.loss) {
                        *a += b;
                    }
                }
                None => {
                    self.entries.insert(key, entry);
                }
            }
        }
    }
}

/// Mapping choice per context.
pub type Rule = BTreeMap<Vec<u8>, usize>;

/// First pass over a 1-D sequence with window order `k`.
pub fn accumulate(z: &[Symbol], k: usize, tables: &LossTables, pad: Padding) -> Result<ContextStats> {
    let spec = ContextSpec::one_d(k, tables.z_size(), pad);
    accumulate_with(Signal::line(z), &spec, tables, DEFAULT_CONTEXT_CAP)
}

/// First pass for any context geometry.
pub fn accumulate_with(
    signal: Signal<'_>,
    spec: &ContextSpec,
    tables: &LossTables,
    cap: usize,
) -> Result<ContextStats> {
    check_length(signal, spec)?;
    spec.check(signal)?;
    let l = tables.l();
    let s_size = tables.s_size();
    let mut entries: BTreeMap<Vec<u8>, ContextEntry> = BTreeMap::new();
    let mut key = Vec::with_capacity(spec.context_len());
    let mut processed = 0;
    for i in 0..signal.len() {
        if !spec.covers(signal, i) {
            continue;
        }
        key.clear();
        spec.key(signal, i, &mut key);
        let row = l.row(signal.symbols()[i] as usize);
        match entries.get_mut(key.as_slice()) {
            Some(e) => {
                e.count += 1;
                for (a, b) in e.loss.iter_mut().zip(row) {
                    *a += b;
                }
            }
            None => {
                if entries.len() >= cap {
                    return Err(Error::TooManyContexts { cap });
                }
                let mut loss = vec![0.0; s_size];
                loss.copy_from_slice(row);
                entries.insert(key.clone(), ContextEntry { count: 1, loss });
            }
        }
        processed += 1;
    }
    Ok(ContextStats { spec: *spec, entries, processed })
}

/// Smallest index attaining the minimum.
#[inline]
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (m, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = m;
        }
    }
    best
}

/// Per context, the canonical-smallest mapping minimizing accumulated loss.
pub fn dude_rule(stats: &ContextStats) -> Rule {
    stats.iter().map(|(k, e)| (k.to_vec(), argmin(&e.loss))).collect()
}

/// DUDE over a 1-D sequence. Under [`Padding::SkipBoundary`] the first and
/// last `k` symbols are copied through.
pub fn dude_denoise(z: &[Symbol], k: usize, channel: &Channel, pad: Padding) -> Result<Vec<Symbol>> {
    let problem = Problem::new(channel.clone())?;
    let spec = ContextSpec::one_d(k, channel.z_size(), pad);
    Ok(denoise(Signal::line(z), &spec, &problem)?.symbols)
}

/// Both DUDE passes for any context geometry, keeping the mapping choices.
pub fn denoise(signal: Signal<'_>, spec: &ContextSpec, problem: &Problem) -> Result<Denoised> {
    denoise_with_cap(signal, spec, problem, DEFAULT_CONTEXT_CAP)
}

pub fn denoise_with_cap(
    signal: Signal<'_>,
    spec: &ContextSpec,
    problem: &Problem,
    cap: usize,
) -> Result<Denoised> {
    let stats = accumulate_with(signal, spec, &problem.tables, cap)?;
    let rule = dude_rule(&stats);
    apply_rule(signal, spec, problem, &rule)
}

pub fn apply_rule(
    signal: Signal<'_>,
    spec: &ContextSpec,
    problem: &Problem,
    rule: &Rule,
) -> Result<Denoised> {
    let z = signal.symbols();
    let mut symbols = Vec::with_capacity(z.len());
    let mut choices = Vec::with_capacity(z.len());
    let mut key = Vec::with_capacity(spec.context_len());
    for (i, &zi) in z.iter().enumerate() {
        if !spec.covers(signal, i) {
            symbols.push(zi);
            choices.push(None);
            continue;
        }
        key.clear();
        spec.key(signal, i, &mut key);
        let m = *rule
            .get(key.as_slice())
            .ok_or(Error::InvalidConfig("context missing from the rule"))?;
        symbols.push(problem.mappings.map(m, zi));
        choices.push(Some(m));
    }
    Ok(Denoised { symbols, choices })
}

fn check_length(signal: Signal<'_>, spec: &ContextSpec) -> Result<()> {
    let n = signal.len();
    let too_short = match (spec.shape, spec.pad) {
        (ContextShape::OneD { k }, Padding::SkipBoundary) => n <= 2 * k,
        _ => n == 0,
    };
    if too_short {
        return Err(Error::SequenceTooShort { n, k: spec.order() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::hamming;
    use crate::linalg::Matrix;

    fn bsc() -> Problem {
        Problem::new(Channel::bsc(0.1).unwrap()).unwrap()
    }

    #[test]
    fn single_interior_position() {
        let p = bsc();
        let stats = accumulate(&[0, 1, 0], 1, &p.tables, Padding::SkipBoundary).unwrap();
        assert_eq!(stats.len(), 1);
        let e = stats.get(&[1, 1]).unwrap();
        assert_eq!(e.count, 1);
        assert_eq!(e.loss.as_slice(), p.tables.l().row(1));
    }

    #[test]
    fn order_zero_is_one_global_context() {
        let p = bsc();
        let z = [0, 1, 1, 0, 0];
        let stats = accumulate(&z, 0, &p.tables, Padding::SkipBoundary).unwrap();
        assert_eq!(stats.len(), 1);
        assert_eq!(stats.processed(), 5);
        let e = stats.get(&[]).unwrap();
        for s in 0..4 {
            let expect = 3.0 * p.tables.l()[(0, s)] + 2.0 * p.tables.l()[(1, s)];
            assert!((e.loss[s] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn rule_examples() {
        // Two zeros and a one as centers of the same context.
        let p = bsc();
        let z = [1, 0, 1, 1, 0, 1, 1, 1, 0];
        let stats = accumulate(&z, 1, &p.tables, Padding::SkipBoundary).unwrap();
        let e = stats.get(&[2, 2]).unwrap();
        let expect = [0.875, 2.7, 0.3, 2.125];
        for s in 0..4 {
            assert!((e.loss[s] - expect[s]).abs() < 1e-12, "{:?}", e.loss);
        }
        let rule = dude_rule(&stats);
        assert_eq!(rule[&[2u8, 2][..]], 2);
    }

    #[test]
    fn ties_go_to_first_mapping() {
        assert_eq!(argmin(&[1.0, 1.0, 1.0, 1.0]), 0);
        assert_eq!(argmin(&[2.0, 1.0, 1.0]), 1);
    }

    #[test]
    fn balanced_order_zero_picks_identity() {
        let p = bsc();
        let z: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        let stats = accumulate(&z, 0, &p.tables, Padding::SkipBoundary).unwrap();
        assert_eq!(dude_rule(&stats)[&[][..]], 2);
    }

    #[test]
    fn noiseless_channel_copies_input() {
        let ch = Channel::new(Matrix::identity(2), hamming(2)).unwrap();
        let z: Vec<u8> = (0..500).map(|i| ((i * i + i / 3) % 2) as u8).collect();
        for k in 0..4 {
            for pad in [Padding::SkipBoundary, Padding::ZeroPad] {
                assert_eq!(dude_denoise(&z, k, &ch, pad).unwrap(), z);
            }
        }
    }

    #[test]
    fn heavy_noise_on_all_zeros() {
        let ch = Channel::bsc(0.4).unwrap();
        let z = ch.corrupt(&vec![0u8; 100_000], 3).unwrap();
        let out = dude_denoise(&z, 0, &ch, Padding::SkipBoundary).unwrap();
        assert!(out.iter().all(|&v| v == 0));
    }

    #[test]
    fn too_short_and_cap() {
        let p = bsc();
        assert!(matches!(
            accumulate(&[0, 1], 1, &p.tables, Padding::SkipBoundary),
            Err(Error::SequenceTooShort { n: 2, k: 1 })
        ));
        assert!(accumulate(&[0, 1], 1, &p.tables, Padding::ZeroPad).is_ok());
        let z: Vec<u8> = (0..64).map(|i| (i % 5 == 0) as u8).collect();
        let spec = ContextSpec::one_d(3, 2, Padding::SkipBoundary);
        assert!(matches!(
            accumulate_with(Signal::line(&z), &spec, &p.tables, 2),
            Err(Error::TooManyContexts { cap: 2 })
        ));
    }

    #[test]
    fn merged_shards_equal_single_pass() {
        let p = bsc();
        let z: Vec<u8> = (0..300).map(|i| ((i * 37 + i / 5) % 2) as u8).collect();
        let full = accumulate(&z, 2, &p.tables, Padding::ZeroPad).unwrap();
        // Shard by position parity using a masked copy of the statistics.
        let spec = ContextSpec::one_d(2, 2, Padding::ZeroPad);
        let sig = Signal::line(&z);
        let mut parts = [full.clone(), full.clone()];
        for part in parts.iter_mut() {
            part.entries.clear();
            part.processed = 0;
        }
        let mut key = Vec::new();
        for i in 0..z.len() {
            key.clear();
            spec.key(sig, i, &mut key);
            let part = &mut parts[i % 2];
            let e = part
                .entries
                .entry(key.clone())
                .or_insert(ContextEntry { count: 0, loss: vec![0.0; 4] });
            e.count += 1;
            for (a, b) in e.loss.iter_mut().zip(p.tables.l().row(z[i] as usize)) {
                *a += b;
            }
            part.processed += 1;
        }
        let [mut a, b] = parts;
        a.merge(b);
        assert_eq!(a.processed(), full.processed());
        assert_eq!(dude_rule(&a), dude_rule(&full));
    }
}
