//! Numeric evaluators for the concentration and denoising-loss bounds.
//!
//! All logarithms are natural. A bound whose value exceeds `C_max` (or is not
//! finite) carries no information about a loss difference and is flagged
//! `vacuous`; the value itself is reported unclipped.
//!
//! With `C̃ = (2B)^{L+1} √((∏ n_ℓ)|S|/2)`:
//!
//! * uniform deviation, any `γ > 0`:
//!   `C_max (2γ|S|² + (2C̃/γ)√(k/n) + (2k+1)√(2 log(2/δ)/n))`,
//! * denoising-loss gap, `γ` optimized:
//!   `2 C_max (4|S|√(C̃√(k/n)) + (2k+1)√(2 log(2/δ)/n))`,
//! * DUDE-class deviation:
//!   `√( (k+1)C_max² / (2(n-2k)) · (log((k+1)/δ) + |Z|^{2k} log(|S|/δ)) )`.
//!
//! The last form keeps `δ` inside both logarithms exactly as derived from
//! equating the union bound `|S|^{|Z|^{2k}}(k+1)exp(..)` with `δ`.

use alloc::vec::Vec;

use crate::channel::LossTables;
use crate::linalg::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    pub vacuous: bool,
}

impl BoundValue {
    fn new(value: f64, c_max: f64) -> Self {
        BoundValue { value, vacuous: !value.is_finite() || value > c_max }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub gamma: Option<f64>,
    /// Per-node incoming weight norm bound.
    pub b: f64,
    pub widths: Vec<usize>,
    pub s_size: usize,
    pub z_size: usize,
    pub c_max: f64,
}

impl BoundInputs {
    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidDelta(self.delta));
        }
        if self.n <= 2 * self.k {
            return Err(Error::SequenceTooShort { n: self.n, k: self.k });
        }
        if !(self.b > 0.0) {
            return Err(Error::InvalidConfig("weight-norm bound must be positive"));
        }
        Ok(())
    }

    pub fn c_tilde(&self) -> f64 {
        c_tilde(self.b, &self.widths, self.s_size)
    }

    /// `γ* = √(C̃√(k/n)) / |S|`, the minimizer of the first two terms.
    pub fn optimal_gamma(&self) -> f64 {
        libm::sqrt(self.c_tilde() * libm::sqrt(self.k as f64 / self.n as f64)) / self.s_size as f64
    }
}

/// `max |L| + max |Λ|`.
pub fn c_max(tables: &LossTables, lambda: &Matrix) -> f64 {
    tables.l().max_abs() + lambda.max_abs()
}

/// `(2B)^{L+1} √((∏ n_ℓ)|S|/2)` for hidden widths `n_1..n_L`.
pub fn c_tilde(b: f64, widths: &[usize], s_size: usize) -> f64 {
    let depth = widths.len() as i32;
    let prod: f64 = widths.iter().map(|&w| w as f64).product();
    libm::pow(2.0 * b, (depth + 1) as f64) * libm::sqrt(prod * s_size as f64 / 2.0)
}

fn sampling_term(n: usize, k: usize, delta: f64) -> f64 {
    (2 * k + 1) as f64 * libm::sqrt(2.0 * libm::log(2.0 / delta) / n as f64)
}

/// Bound on the denoising-loss gap to the best network in the class.
pub fn thm1_rhs(inp: &BoundInputs) -> Result<BoundValue> {
    inp.validate()?;
    if inp.k == 0 {
        return Err(Error::InvalidConfig("context order must be at least 1"));
    }
    let s = inp.s_size as f64;
    let complexity = libm::sqrt(inp.c_tilde() * libm::sqrt(inp.k as f64 / inp.n as f64));
    let value = 2.0 * inp.c_max * (4.0 * s * complexity + sampling_term(inp.n, inp.k, inp.delta));
    Ok(BoundValue::new(value, inp.c_max))
}

/// Uniform deviation bound between average estimated and true loss, at
/// `inp.gamma` (the optimum when unset).
pub fn thm2_rhs(inp: &BoundInputs) -> Result<BoundValue> {
    inp.validate()?;
    let gamma = inp.gamma.unwrap_or_else(|| inp.optimal_gamma());
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidGamma(gamma));
    }
    let s = inp.s_size as f64;
    let value = inp.c_max
        * (2.0 * gamma * s * s
            + 2.0 * inp.c_tilde() / gamma * libm::sqrt(inp.k as f64 / inp.n as f64)
            + sampling_term(inp.n, inp.k, inp.delta));
    Ok(BoundValue::new(value, inp.c_max))
}

/// Deviation bound over all `k`-th order sliding-window denoisers.
pub fn prop3_epsilon(
    n: usize,
    k: usize,
    delta: f64,
    z_size: usize,
    s_size: usize,
    c_max: f64,
) -> Result<BoundValue> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    if n <= 2 * k {
        return Err(Error::SequenceTooShort { n, k });
    }
    let kp1 = (k + 1) as f64;
    let contexts = libm::pow(z_size as f64, (2 * k) as f64);
    let logs = libm::log(kp1 / delta) + contexts * libm::log(s_size as f64 / delta);
    let value = libm::sqrt(kp1 * c_max * c_max / (2.0 * (n - 2 * k) as f64) * logs);
    Ok(BoundValue::new(value, c_max))
}
