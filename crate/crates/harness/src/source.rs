//! Synthetic clean sources.

use dude_core::rng::{SeededRng, Stream};
use dude_core::Symbol;

use crate::error::{HarnessError, Result};

/// Binary symmetric Markov chain: `x_1` uniform, then each symbol flips the
/// previous one with probability `switch_prob`.
pub fn gen_markov_source(n: usize, switch_prob: f64, seed: u64) -> Result<Vec<Symbol>> {
    if !(switch_prob > 0.0 && switch_prob < 1.0) {
        return Err(HarnessError::Core(dude_core::Error::InvalidProbability(switch_prob)));
    }
    let mut rng = SeededRng::new(seed, Stream::Source);
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let mut cur = (rng.uniform() < 0.5) as Symbol;
    out.push(cur);
    for _ in 1..n {
        if rng.uniform() < switch_prob {
            cur ^= 1;
        }
        out.push(cur);
    }
    Ok(out)
}
