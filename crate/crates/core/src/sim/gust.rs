//! Seeded wind-speed fluctuation: discretized first-order filtered white
//! noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::scenario::GustConfig;

#[derive(Debug, Clone)]
pub struct GustProcess {
    rng: ChaCha8Rng,
    decay: f64,
    gain: f64,
    value: f64,
}

impl GustProcess {
    pub fn new(cfg: &GustConfig, dt: f64, seed: u64) -> Self {
        let decay = (-dt / cfg.time_constant).exp();
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            decay,
            gain: cfg.intensity * (1.0 - decay * decay).sqrt(),
            value: 0.0,
        }
    }

    /// Relative speed fluctuation for the next step.
    pub fn next(&mut self) -> f64 {
        let n: f64 = StandardNormal.sample(&mut self.rng);
        self.value = self.decay * self.value + self.gain * n;
        self.value
    }
}
