//! Discrete memoryless channel algebra.
//!
//! A [`Channel`] carries the transition matrix `Π` (`|X|×|Z|`, row `x` is the
//! law of the noisy symbol given clean symbol `x`) and the loss matrix `Λ`
//! (`|X|×|X̂|`). From these and a set of single-symbol denoisers we build
//!
//! * `ρ(x, s) = Σ_z Π(x, z) Λ(x, s(z))`, the expected loss of `s` on `x`,
//! * `L = Π† ρ` with `Π† = Πᵀ(ΠΠᵀ)⁻¹`, the estimated loss, which satisfies
//!   `Σ_z Π(x, z) L(z, s) = ρ(x, s)` for every `x` and `s`,
//! * `L_new = L_max·11ᵀ − L`, the non-negative pseudo-label table.

use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::mappings::MappingSet;
use crate::rng::{SeededRng, Stream};
use crate::{Error, Result, Symbol, MAX_ALPHABET};

/// Tolerance on transition-matrix row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Smallest singular value of `Π` below which it counts as rank deficient.
pub const RANK_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pi: Matrix,
    lambda: Matrix,
    pinv: Matrix,
}

impl Channel {
    pub fn new(pi: Matrix, lambda: Matrix) -> Result<Self> {
        let (x_size, z_size) = (pi.rows(), pi.cols());
        if x_size == 0 || z_size == 0 || lambda.cols() == 0 {
            return Err(Error::ShapeMismatch("empty alphabet"));
        }
        if lambda.rows() != x_size {
            return Err(Error::ShapeMismatch("loss matrix must have one row per clean symbol"));
        }
        if x_size > z_size {
            return Err(Error::ShapeMismatch("clean alphabet larger than noisy alphabet"));
        }
        if z_size > MAX_ALPHABET || lambda.cols() > MAX_ALPHABET {
            return Err(Error::ShapeMismatch("alphabet larger than supported"));
        }
        for x in 0..x_size {
            let mut sum = 0.0;
            for z in 0..z_size {
                let p = pi[(x, z)];
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidEntry { row: x, col: z, value: p });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NonStochasticRow { row: x, sum });
            }
        }
        for x in 0..x_size {
            for xh in 0..lambda.cols() {
                let v = lambda[(x, xh)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidEntry { row: x, col: xh, value: v });
                }
            }
        }
        let pinv = pseudo_inverse(&pi)?;
        Ok(Channel { pi, lambda, pinv })
    }

    /// Binary symmetric channel with crossover probability `delta` and Hamming loss.
    pub fn bsc(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidProbability(delta));
        }
        let pi = Matrix::from_rows(&[[1.0 - delta, delta], [delta, 1.0 - delta]])?;
        Channel::new(pi, hamming(2))
    }

    pub fn pi(&self) -> &Matrix {
        &self.pi
    }

    pub fn lambda(&self) -> &Matrix {
        &self.lambda
    }

    /// `Π† = Πᵀ(ΠΠᵀ)⁻¹`, computed once at construction.
    pub fn pseudo_inverse(&self) -> &Matrix {
        &self.pinv
    }

    pub fn x_size(&self) -> usize {
        self.pi.rows()
    }

    pub fn z_size(&self) -> usize {
        self.pi.cols()
    }

    pub fn xhat_size(&self) -> usize {
        self.lambda.cols()
    }

    /// The full set of single-symbol denoisers for this channel's alphabets.
    pub fn mappings(&self) -> Result<MappingSet> {
        MappingSet::enumerate(self.z_size(), self.xhat_size())
    }

    /// `ρ(x, s) = E_{Z|x} Λ(x, s(Z))`, shape `|X|×|S|`.
    pub fn rho(&self, set: &MappingSet) -> Result<Matrix> {
        self.check_set(set)?;
        let mut rho = Matrix::zeros(self.x_size(), set.len());
        for x in 0..self.x_size() {
            for m in 0..set.len() {
                let s = set.row(m);
                rho[(x, m)] = (0..self.z_size())
                    .map(|z| self.pi[(x, z)] * self.lambda[(x, s[z] as usize)])
                    .sum();
            }
        }
        Ok(rho)
    }

    /// Estimated loss `L = Π† ρ` together with `L_new` and `L_max`.
    pub fn estimated_loss(&self, set: &MappingSet) -> Result<LossTables> {
        let rho = self.rho(set)?;
        let l = self.pinv.matmul(&rho)?;
        Ok(LossTables::from_estimated(l))
    }

    /// Passes `clean` through the channel. Each output symbol is drawn from
    /// row `x_i` of `Π` by inverting its cumulative distribution at one
    /// uniform draw of the [`Stream::Channel`] stream of `seed`.
    pub fn corrupt(&self, clean: &[Symbol], seed: u64) -> Result<Vec<Symbol>> {
        let z_size = self.z_size();
        let mut cumulative = Matrix::zeros(self.x_size(), z_size);
        let mut last = Vec::with_capacity(self.x_size());
        for x in 0..self.x_size() {
            let mut acc = 0.0;
            let mut last_nonzero = 0;
            for z in 0..z_size {
                acc += self.pi[(x, z)];
                cumulative[(x, z)] = acc;
                if self.pi[(x, z)] > 0.0 {
                    last_nonzero = z;
                }
            }
            last.push(last_nonzero as Symbol);
        }
        let mut rng = SeededRng::new(seed, Stream::Channel);
        clean
            .iter()
            .map(|&x| {
                let xi = x as usize;
                if xi >= self.x_size() {
                    return Err(Error::SymbolOutOfAlphabet { symbol: xi, size: self.x_size() });
                }
                let u = rng.uniform();
                let row = cumulative.row(xi);
                let z = row
                    .iter()
                    .position(|&c| u < c)
                    .map_or(last[xi], |z| z as Symbol);
                Ok(z)
            })
            .collect()
    }

    fn check_set(&self, set: &MappingSet) -> Result<()> {
        if set.z_size() != self.z_size() || set.xhat_size() != self.xhat_size() {
            return Err(Error::ShapeMismatch("mapping set alphabets differ from the channel"));
        }
        Ok(())
    }
}

/// Hamming loss on an alphabet of size `n`.
pub fn hamming(n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[(i, j)] = 1.0;
            }
        }
    }
    m
}

/// Moore-Penrose pseudoinverse `Πᵀ(ΠΠᵀ)⁻¹` of a full-row-rank matrix.
///
/// Rank is checked on the singular values of `Π` (threshold
/// [`RANK_THRESHOLD`]). The product is evaluated through a QR factorization
/// of `Πᵀ`, so the accuracy of `ΠΠ† = I` degrades with the condition number of
/// `Π` rather than its square.
pub fn pseudo_inverse(pi: &Matrix) -> Result<Matrix> {
    if pi.rows() > pi.cols() {
        return Err(Error::RankDeficient { min_singular: 0.0 });
    }
    let min_singular = pi.singular_values().last().copied().unwrap_or(0.0);
    if !(min_singular > RANK_THRESHOLD) {
        return Err(Error::RankDeficient { min_singular });
    }
    pi.right_pseudo_inverse()
}

/// Estimated-loss table `L` (`|Z|×|S|`) and the derived pseudo-label table.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTables {
    l: Matrix,
    l_new: Matrix,
    l_max: f64,
}

impl LossTables {
    /// Fills `L_new = L_max − L` from an estimated-loss matrix.
    pub fn from_estimated(l: Matrix) -> Self {
        let l_max = l.max();
        let mut l_new = Matrix::zeros(l.rows(), l.cols());
        for z in 0..l.rows() {
            for s in 0..l.cols() {
                l_new[(z, s)] = l_max - l[(z, s)];
            }
        }
        LossTables { l, l_new, l_max }
    }

    pub fn l(&self) -> &Matrix {
        &self.l
    }

    pub fn l_new(&self) -> &Matrix {
        &self.l_new
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn s_size(&self) -> usize {
        self.l.cols()
    }

    pub fn z_size(&self) -> usize {
        self.l.rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec;

    fn close_rows(m: &Matrix, r: usize, expect: &[f64], tol: f64) {
        for (c, e) in expect.iter().enumerate() {
            assert!((m[(r, c)] - e).abs() < tol, "({r},{c}): {} vs {e}", m[(r, c)]);
        }
    }

    #[test]
    fn noiseless_and_bsc_are_valid() {
        assert!(Channel::new(Matrix::identity(2), hamming(2)).is_ok());
        let ch = Channel::bsc(0.1).unwrap();
        assert_eq!((ch.x_size(), ch.z_size(), ch.xhat_size()), (2, 2, 2));
    }

    #[test]
    fn rank_one_is_rejected() {
        let pi = Matrix::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert!(matches!(Channel::new(pi, hamming(2)), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn bad_rows_are_rejected() {
        let pi = Matrix::from_rows(&[[0.9, 0.2], [0.1, 0.9]]).unwrap();
        assert!(matches!(
            Channel::new(pi, hamming(2)),
            Err(Error::NonStochasticRow { row: 0, .. })
        ));
        let pi = Matrix::from_rows(&[[1.1, -0.1], [0.1, 0.9]]).unwrap();
        assert!(matches!(Channel::new(pi, hamming(2)), Err(Error::InvalidEntry { .. })));
        let neg = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(Channel::new(Matrix::identity(2), neg), Err(Error::InvalidEntry { .. })));
    }

    #[test]
    fn pseudo_inverse_of_bsc() {
        let ch = Channel::bsc(0.1).unwrap();
        let p = ch.pseudo_inverse();
        let s = 1.0 / 0.8;
        close_rows(p, 0, &[0.9 * s, -0.1 * s], 1e-12);
        close_rows(p, 1, &[-0.1 * s, 0.9 * s], 1e-12);
        let id = ch.pi().matmul(p).unwrap();
        assert!(id.max_abs_diff(&Matrix::identity(2)).unwrap() < 1e-10);
    }

    #[test]
    fn pseudo_inverse_of_rectangular() {
        let pi = Matrix::from_rows(&[[0.8, 0.1, 0.1], [0.05, 0.05, 0.9]]).unwrap();
        let p = pseudo_inverse(&pi).unwrap();
        assert_eq!((p.rows(), p.cols()), (3, 2));
        let id = pi.matmul(&p).unwrap();
        assert!(id.max_abs_diff(&Matrix::identity(2)).unwrap() < 1e-10);
    }

    #[test]
    fn rho_and_estimated_loss_for_bsc() {
        let ch = Channel::bsc(0.1).unwrap();
        let s = ch.mappings().unwrap();
        let rho = ch.rho(&s).unwrap();
        close_rows(&rho, 0, &[0.0, 0.9, 0.1, 1.0], 1e-12);
        close_rows(&rho, 1, &[1.0, 0.9, 0.1, 0.0], 1e-12);
        let t = ch.estimated_loss(&s).unwrap();
        close_rows(t.l(), 0, &[-0.125, 0.9, 0.1, 1.125], 1e-12);
        close_rows(t.l(), 1, &[1.125, 0.9, 0.1, -0.125], 1e-12);
        close_rows(t.l_new(), 0, &[1.25, 0.225, 1.025, 0.0], 1e-12);
        assert!((t.l_max() - 1.125).abs() < 1e-12);
    }

    #[test]
    fn noiseless_rho_is_loss_of_mapped_symbol() {
        let ch = Channel::new(Matrix::identity(3), hamming(3)).unwrap();
        let s = ch.mappings().unwrap();
        let rho = ch.rho(&s).unwrap();
        for x in 0..3 {
            for m in 0..s.len() {
                assert_eq!(rho[(x, m)], ch.lambda()[(x, s.map(m, x as u8) as usize)]);
            }
        }
    }

    #[test]
    fn corrupt_noiseless_is_identity() {
        let ch = Channel::new(Matrix::identity(2), hamming(2)).unwrap();
        let x = vec![0, 1, 1, 0, 1];
        assert_eq!(ch.corrupt(&x, 99).unwrap(), x);
    }

    #[test]
    fn corrupt_rejects_foreign_symbols() {
        let ch = Channel::bsc(0.1).unwrap();
        assert!(matches!(
            ch.corrupt(&[0, 2], 0),
            Err(Error::SymbolOutOfAlphabet { symbol: 2, size: 2 })
        ));
    }

    #[test]
    fn corrupt_flip_rate_and_determinism() {
        let ch = Channel::bsc(0.1).unwrap();
        let x = vec![0u8; 1_000_000];
        let z = ch.corrupt(&x, 5).unwrap();
        let rate = z.iter().filter(|&&v| v == 1).count() as f64 / x.len() as f64;
        assert!((0.099..=0.101).contains(&rate), "{rate}");
        assert_eq!(z, ch.corrupt(&x, 5).unwrap());
        assert_ne!(z, ch.corrupt(&x, 6).unwrap());
    }
}
