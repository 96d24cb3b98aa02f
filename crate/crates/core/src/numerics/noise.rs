use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::grid::{Field, Grid1D};

/// Identity of a reproducible random stream: a master seed plus a stream
/// index. Two streams with different indices never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Child stream for path `i` of an ensemble.
    pub fn path(&self, i: u64) -> Self {
        Self { seed: self.seed, stream: self.stream.wrapping_mul(1 << 32).wrapping_add(i) }
    }

    pub fn generator(&self) -> Noise {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        Noise { rng }
    }
}

/// Gaussian source backed by a ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct Noise {
    rng: ChaCha8Rng,
}

impl Noise {
    #[inline]
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn fill_normal(&mut self, out: &mut [f64], scale: f64) {
        for v in out {
            *v = scale * self.normal();
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Space-time white-noise increment over one step: independent
/// `N(0, dt/dx)` values on every node.
pub fn sample_white_noise_increment(grid: &Grid1D, dt: f64, noise: &mut Noise) -> Field {
    let mut f = Field::zeros(*grid);
    noise.fill_normal(&mut f.values, (dt / grid.dx()).sqrt());
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = RngStream::new(7, 3);
        let a: Vec<f64> = (0..5).map({
            let mut g = s.generator();
            move |_| g.normal()
        }).collect();
        let mut g = s.generator();
        let b: Vec<f64> = (0..5).map(|_| g.normal()).collect();
        assert_eq!(a, b);
        let mut h = RngStream::new(7, 4).generator();
        assert_ne!(a[0], h.normal());
    }

    #[test]
    fn increment_variance() {
        let grid = Grid1D::new(1.0, 200).unwrap();
        let dt = 1e-3;
        let mut g = RngStream::new(1, 0).generator();
        let mut acc = 0.0;
        let mut n = 0usize;
        for _ in 0..200 {
            let w = sample_white_noise_increment(&grid, dt, &mut g);
            acc += w.values.iter().map(|v| v * v).sum::<f64>();
            n += w.len();
        }
        let var = acc / n as f64;
        let expect = dt / grid.dx();
        assert!((var / expect - 1.0).abs() < 0.02, "{var} vs {expect}");
    }
}
