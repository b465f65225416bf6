//! Reproducible random streams.
//!
//! A [`RandomStream`] is a `(seed, index)` pair. The generator is ChaCha8
//! keyed by the seed with the stream index as the ChaCha stream id, so every
//! index addresses a disjoint keystream and the draws do not depend on the
//! platform, the thread count or the order in which paths are evaluated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub index: u64,
}

impl RandomStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// Stream `index` under the same root seed.
    pub fn with_index(self, index: u64) -> Self {
        Self { index, ..self }
    }

    pub fn rng(&self) -> StreamRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.index);
        StreamRng { inner }
    }
}

/// Generator handed out by [`RandomStream::rng`].
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    /// Uniform on the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        loop {
            let u: f64 = self.inner.random();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.random()
    }

    /// Exponential with unit rate, by inversion.
    pub fn exp1(&mut self) -> f64 {
        -self.open01().ln()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(rand_distr::StandardNormal)
    }
}
