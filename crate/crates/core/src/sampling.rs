//! Seeded random streams.
//!
//! Every column draws from its own ChaCha8 stream derived from the root
//! seed, so results do not depend on the order columns are processed in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

pub type ColumnRng = ChaCha8Rng;

pub fn column_rng(seed: u64, stream: u64) -> ColumnRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Beta(a, b) sampler built from two Gamma draws, `X / (X + Y)`.
#[derive(Debug, Clone, Copy)]
pub struct BetaSampler {
    x: Gamma<f64>,
    y: Gamma<f64>,
}

impl BetaSampler {
    pub fn new(a: f64, b: f64) -> Option<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return None;
        }
        Some(Self {
            x: Gamma::new(a, 1.0).ok()?,
            y: Gamma::new(b, 1.0).ok()?,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = self.x.sample(rng);
        let y = self.y.sample(rng);
        x / (x + y)
    }
}
