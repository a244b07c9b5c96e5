//! Seeded, platform-independent random streams.
//!
//! Every random draw in the crate comes from ChaCha with 8 rounds
//! (`rand_chacha::ChaCha8Rng`). A run seed is expanded into the 256-bit key
//! with `SeedableRng::seed_from_u64` (PCG32 expansion), and each consumer
//! draws from its own ChaCha stream id (see [`Stream`]), so e.g. the channel
//! noise for a seed does not change when the network initialization does.
//!
//! Uniform reals take the top 53 bits of one `u64` output:
//! `(x >> 11) as f64 * 2^-53`, which lies in `[0, 1)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Independent stream ids derived from one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Source = 1,
    Channel = 2,
    Init = 3,
    Shuffle = 4,
}

#[derive(Debug, Clone)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream as u64);
        SeededRng(inner)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform draw from `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform integer in `0..bound` by rejection, `bound > 0`.
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        let bound = bound as u64;
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return (x % bound) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
