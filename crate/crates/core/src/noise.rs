//! Seeded Gaussian noise used by trace synthesis and the lock-loop sensor
//! model. ChaCha keeps the streams reproducible across platforms and rand
//! versions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub(crate) struct GaussianNoise {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl GaussianNoise {
    pub fn new(seed: u64) -> Self {
        GaussianNoise {
            rng: ChaCha12Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Standard normal sample via Box-Muller.
    pub fn sample(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u: f64 = self.rng.gen();
            let v: f64 = self.rng.gen();
            if u > f64::MIN_POSITIVE {
                let r = (-2.0 * u.ln()).sqrt();
                let theta = 2.0 * std::f64::consts::PI * v;
                self.spare = Some(r * theta.sin());
                return r * theta.cos();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let a: Vec<f64> = {
            let mut g = GaussianNoise::new(7);
            (0..64).map(|_| g.sample()).collect()
        };
        let b: Vec<f64> = {
            let mut g = GaussianNoise::new(7);
            (0..64).map(|_| g.sample()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn roughly_standard_moments() {
        let mut g = GaussianNoise::new(12345);
        let n = 200_000;
        let samples: Vec<f64> = (0..n).map(|_| g.sample()).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean = {mean}");
        assert!((var - 1.0).abs() < 0.02, "var = {var}");
    }
}
