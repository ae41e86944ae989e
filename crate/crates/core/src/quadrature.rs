//! Gauss–Hermite quadrature.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};

/// Nodes and weights for `∫ e^{-x²} f(x) dx ≈ Σ w_k f(x_k)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub–Welsch eigenvalues of the Hermite Jacobi matrix, each polished
    /// by Newton steps on the orthonormal recurrence; weights come from the
    /// recurrence derivative.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 1000 {
            return Err(invalid("Gauss-Hermite order must be in 1..=1000"));
        }
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let mut guesses: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        guesses.sort_by(|a, b| b.total_cmp(a));

        let nf = n as f64;
        // orthonormal Hermite value at z and the derivative factor
        let eval = |z: f64| {
            const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
            let (mut p1, mut p2) = (PIM4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            (p1, (2.0 * nf).sqrt() * p2)
        };

        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = guesses[i];
            let mut pp = eval(z).1;
            for _ in 0..8 {
                let (p, d) = eval(z);
                pp = d;
                let step = p / d;
                z -= step;
                if step.abs() <= 1e-16 * z.abs().max(1.0) {
                    break;
                }
            }
            if 2 * i + 1 == n {
                z = 0.0;
                pp = eval(0.0).1;
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        Ok(GaussHermite { nodes, weights })
    }

    /// `E[f(Y)]` for `Y ~ N(0, sd²)`.
    pub fn normal_expectation(&self, sd: f64, f: impl Fn(f64) -> f64) -> f64 {
        let scale = core::f64::consts::SQRT_2 * sd;
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(scale * t))
            .sum();
        sum / core::f64::consts::PI.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_moments_are_exact() {
        for n in [1, 2, 5, 20, 64, 200] {
            let gh = GaussHermite::new(n).unwrap();
            let total: f64 = gh.weights.iter().sum();
            assert!((total - core::f64::consts::PI.sqrt()).abs() < 1e-13, "n={n} total={total:e}");
            let sd = 1.7;
            let m2 = gh.normal_expectation(sd, |y| y * y);
            if n >= 2 {
                assert!((m2 - sd * sd).abs() < 1e-12, "n={n} m2={m2:e}");
            }
            if n >= 3 {
                let m4 = gh.normal_expectation(sd, |y| y.powi(4));
                assert!((m4 - 3.0 * sd.powi(4)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn nodes_are_symmetric_and_sorted() {
        let gh = GaussHermite::new(9).unwrap();
        assert_eq!(gh.nodes[4], 0.0);
        for i in 0..4 {
            assert_eq!(gh.nodes[i], -gh.nodes[8 - i]);
        }
        assert!(gh.nodes.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn smooth_integrand() {
        // E[cos Y] = exp(-sd²/2)
        let gh = GaussHermite::new(40).unwrap();
        let v = gh.normal_expectation(1.3, |y| y.cos());
        assert!((v - (-1.3f64 * 1.3 / 2.0).exp()).abs() < 1e-14);
    }
}
