//! Small numerical helpers shared across modules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)]
use num_traits::Float;

use crate::par;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Standard normal upper tail `1 - Φ(x)`, accurate for large `x`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// Mean of a Monte Carlo average with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, other: Self) -> Self {
        Moments {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    pub fn estimate(self) -> MonteCarloEstimate {
        if self.count == 0 {
            return MonteCarloEstimate { mean: 0.0, std_error: 0.0, samples: 0 };
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        MonteCarloEstimate { mean, std_error: (var / n).sqrt(), samples: self.count }
    }
}

/// Samples per RNG substream.
pub(crate) const CHUNK: usize = 1024;

/// Runs `samples` draws of `draw` split into fixed-size chunks, each with its
/// own ChaCha stream derived from `seed`, and reduces the chunk moments in a
/// fixed tree order.
pub(crate) fn chunked_monte_carlo<F>(samples: usize, seed: u64, draw: F) -> MonteCarloEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync + Send,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts = par::map_indexed(chunks, |c| {
        let mut rng = substream(seed, c as u64);
        let len = CHUNK.min(samples - c * CHUNK);
        let mut m = Moments::default();
        for _ in 0..len {
            m.push(draw(&mut rng));
        }
        m
    });
    par::tree_reduce(&parts, Moments::default(), &Moments::merge).estimate()
}

/// Independent generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Population mean and variance (divide by n).
pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((normal_cdf(-1.0) - 0.15865525393145707).abs() < 1e-15);
        assert!((normal_sf(10.0) - 7.619853024160527e-24).abs() < 1e-36);
    }

    #[test]
    fn chunking_is_independent_of_sample_split() {
        let a = chunked_monte_carlo(3000, 9, rand::Rng::random::<f64>);
        let b = chunked_monte_carlo(3000, 9, rand::Rng::random::<f64>);
        assert_eq!(a, b);
        assert_eq!(a.samples, 3000);
        assert!((a.mean - 0.5).abs() < 4.0 * a.std_error);
    }
}
