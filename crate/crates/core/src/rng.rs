//! Seeded randomness.
//!
//! Every stochastic stage draws from a [`RandomSource`]. The generator is
//! ChaCha8 seeded through `seed_from_u64`, so a seed fixes every draw of a
//! run within this implementation. Independent sub-streams are derived with
//! [`RandomSource::derive`] so that adding draws to one stage never shifts
//! the draws of another.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    inner: ChaCha8Rng,
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A fresh source whose seed is a pure function of this source's seed
    /// and the given stream path. Does not consume draws from `self`.
    pub fn derive(&self, path: &[u64]) -> Self {
        let seed = path
            .iter()
            .fold(mix(self.seed), |acc, &p| mix(acc ^ mix(p.wrapping_add(1))));
        Self::new(seed)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn unit_uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (mean 0, variance 1).
    pub fn unit_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform integer in [0, n). `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below() needs a non-empty range");
        self.inner.random_range(0..n)
    }

    /// Index drawn with probability proportional to `weights`. Returns
    /// `None` when every weight is zero or the slice is empty.
    pub fn weighted_index(&mut self, weights: &[f64]) -> Option<usize> {
        let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
        if !(total > 0.0) {
            return None;
        }
        let mut target = self.unit_uniform() * total;
        let mut last = None;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            if target < w {
                return Some(i);
            }
            target -= w;
            last = Some(i);
        }
        last
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
