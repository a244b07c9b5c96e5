//! Average estimated loss, average true loss and their difference (regret).

use alloc::vec::Vec;

use crate::channel::LossTables;
use crate::context::Padding;
use crate::linalg::Matrix;
use crate::{Error, Result, Symbol};

/// Output of a sliding-window denoiser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Denoised {
    pub symbols: Vec<Symbol>,
    /// Mapping applied at each position; `None` where the position was copied
    /// through without being evaluated (skipped boundary).
    pub choices: Vec<Option<usize>>,
}

impl Denoised {
    pub fn n_eval(&self) -> usize {
        self.choices.iter().filter(|c| c.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub est_loss: f64,
    pub true_loss: Option<f64>,
    pub regret: Option<f64>,
    pub n_eval: usize,
    pub boundary_rule: Padding,
}

/// `(1/n) Σ_i L(Z_i, m_i)`.
pub fn avg_estimated_loss(z: &[Symbol], choices: &[usize], tables: &LossTables) -> Result<f64> {
    if z.len() != choices.len() {
        return Err(Error::LengthMismatch { left: z.len(), right: choices.len() });
    }
    if z.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let l = tables.l();
    let sum: f64 = z.iter().zip(choices).map(|(&zi, &m)| l[(zi as usize, m)]).sum();
    Ok(sum / z.len() as f64)
}

/// `(1/n) Σ_i Λ(x_i, x̂_i)`; the bit error rate under Hamming loss.
pub fn avg_true_loss(x: &[Symbol], xhat: &[Symbol], lambda: &Matrix) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: xhat.len() });
    }
    if x.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let sum: f64 = x
        .iter()
        .zip(xhat)
        .map(|(&a, &b)| lambda[(a as usize, b as usize)])
        .sum();
    Ok(sum / x.len() as f64)
}

pub fn relative_ber(true_loss: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::ZeroDelta);
    }
    Ok(true_loss / delta)
}

/// Loss report over the positions the denoiser evaluated.
pub fn report(
    noisy: &[Symbol],
    clean: Option<&[Symbol]>,
    out: &Denoised,
    tables: &LossTables,
    lambda: &Matrix,
    boundary_rule: Padding,
) -> Result<LossReport> {
    if noisy.len() != out.choices.len() || noisy.len() != out.symbols.len() {
        return Err(Error::LengthMismatch { left: noisy.len(), right: out.choices.len() });
    }
    if let Some(x) = clean {
        if x.len() != noisy.len() {
            return Err(Error::LengthMismatch { left: x.len(), right: noisy.len() });
        }
    }
    let l = tables.l();
    let (mut est, mut truth, mut n) = (0.0, 0.0, 0usize);
    for (i, choice) in out.choices.iter().enumerate() {
        let Some(m) = *choice else { continue };
        est += l[(noisy[i] as usize, m)];
        if let Some(x) = clean {
            truth += lambda[(x[i] as usize, out.symbols[i] as usize)];
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyEvaluation);
    }
    let est_loss = est / n as f64;
    let true_loss = clean.map(|_| truth / n as f64);
    Ok(LossReport {
        est_loss,
        true_loss,
        regret: true_loss.map(|t| est_loss - t),
        n_eval: n,
        boundary_rule,
    })
}
