//! β-mixing coefficients of Gaussian AR surrogates and block planning.
//!
//! For a stationary Markov chain with invariant law `π` and `m`-step kernel
//! `P^m`, `β(m) = ∫ π(dx) ‖P^m(x, ·) − π‖_TV`. An AR(q) process is Markov in
//! its q-vector of lags; the scalar past up to `t` and the scalar future from
//! `t + m` are generated (up to independent later innovations) by the state
//! vectors at `t` and `t + m + q − 1`, so the scalar `β(m)` equals the state
//! chain's coefficient at lag `m + q − 1`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
#[allow(unused_imports)]
use num_traits::Float;

use crate::armodel::fit_stationary;
use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussHermite;
use crate::stability::{companion_matrix, is_stationary, CoefVector};
use crate::stats::{chunked_monte_carlo, normal_cdf, normal_sf, MonteCarloEstimate};
use crate::timeseries::GrowthSeries;

/// Total variation distance `½∫|f − g|` between `N(mean1, var1)` and `N(mean2, var2)`.
///
/// The densities cross where the log-density difference, a quadratic in x,
/// vanishes; the distance is the mass difference over the region where the
/// first density dominates.
pub fn tv_gaussians_1d(mean1: f64, var1: f64, mean2: f64, var2: f64) -> Result<f64> {
    if !(var1 > 0.0) || !(var2 > 0.0) {
        return Err(invalid("variances must be positive"));
    }
    let (s1, s2) = (var1.sqrt(), var2.sqrt());
    if var1 == var2 {
        let d = (mean1 - mean2).abs() / (2.0 * s1);
        return Ok(clamp01(1.0 - 2.0 * normal_sf(d)));
    }
    // −var2 (x − m1)² + var1 (x − m2)² + var1 var2 ln(var2/var1) = 0
    let a = var1 - var2;
    let b = 2.0 * (var2 * mean1 - var1 * mean2);
    let c = var1 * mean2 * mean2 - var2 * mean1 * mean1 + var1 * var2 * (var2 / var1).ln();
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 {
        let r = (-c / a).max(0.0).sqrt();
        (-r, r)
    } else {
        let (u, v) = (q / a, c / q);
        (u.min(v), u.max(v))
    };
    let mass = |m: f64, s: f64| normal_cdf((r2 - m) / s) - normal_cdf((r1 - m) / s);
    // the narrower density dominates between the crossings
    let tv = if var1 < var2 {
        mass(mean1, s1) - mass(mean2, s2)
    } else {
        mass(mean2, s2) - mass(mean1, s1)
    };
    Ok(clamp01(tv))
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// A Gaussian AR(q) process used as a stand-in for the unknown data law.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianArSurrogate {
    pub phi: CoefVector,
    pub sigma: f64,
}

impl GaussianArSurrogate {
    pub fn new(phi: CoefVector, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invalid("surrogate innovation sd must be positive"));
        }
        if !is_stationary(&phi, 0.0) {
            return Err(Error::NotStationary);
        }
        Ok(GaussianArSurrogate { phi, sigma })
    }

    /// Stationarity-constrained least-squares AR(q) fit with the residual
    /// standard deviation as innovation scale.
    pub fn fit(series: &GrowthSeries, q: usize, margin: f64) -> Result<Self> {
        let fit = fit_stationary(series, q, f64::MAX, margin)?;
        Self::new(fit.coef, fit.sigma2.sqrt())
    }

    pub fn order(&self) -> usize {
        self.phi.order()
    }
}

/// β(m) of a Gaussian AR(1) by Gauss–Hermite quadrature of the analytic
/// one-dimensional total variation against the stationary law.
pub fn beta_ar1(surrogate: &GaussianArSurrogate, m: usize, quad_points: usize) -> Result<f64> {
    if surrogate.order() != 1 {
        return Err(invalid("beta_ar1 needs an AR(1) surrogate"));
    }
    if m == 0 {
        return Err(invalid("lag must be at least 1"));
    }
    let phi = surrogate.phi.as_slice()[0];
    if !(phi.abs() < 1.0) {
        return Err(Error::NotStationary);
    }
    if phi == 0.0 {
        return Ok(0.0);
    }
    let s2 = surrogate.sigma * surrogate.sigma;
    let stationary_var = s2 / (1.0 - phi * phi);
    let phi_m = phi.powi(m as i32);
    let step_var = s2 * (1.0 - phi_m * phi_m) / (1.0 - phi * phi);
    let gh = GaussHermite::new(quad_points)?;
    let value = gh.normal_expectation(stationary_var.sqrt(), |x| {
        tv_gaussians_1d(phi_m * x, step_var, 0.0, stationary_var).unwrap_or(f64::NAN)
    });
    if !value.is_finite() {
        return Err(invalid("degenerate transition variance"));
    }
    Ok(clamp01(value))
}

/// Precomputed Cholesky factors for a pair of multivariate normals
/// `f = N(·, cov_f)` and `g = N(·, cov_g)`.
struct GaussianPair {
    dim: usize,
    lf: Vec<f64>,
    lg: Vec<f64>,
    half_logdet_f: f64,
    half_logdet_g: f64,
}

impl GaussianPair {
    fn new(cov_f: DMatrix<f64>, cov_g: DMatrix<f64>) -> Option<Self> {
        let dim = cov_f.nrows();
        let flat = |c: Cholesky<f64, nalgebra::Dyn>| -> (Vec<f64>, f64) {
            let l = c.l();
            let half_logdet = (0..dim).map(|i| l[(i, i)].ln()).sum();
            let mut out = vec![0.0; dim * dim];
            for i in 0..dim {
                for j in 0..=i {
                    out[i * dim + j] = l[(i, j)];
                }
            }
            (out, half_logdet)
        };
        let (lf, half_logdet_f) = flat(Cholesky::new(cov_f)?);
        let (lg, half_logdet_g) = flat(Cholesky::new(cov_g)?);
        if !half_logdet_f.is_finite() || !half_logdet_g.is_finite() {
            return None;
        }
        Some(GaussianPair { dim, lf, lg, half_logdet_f, half_logdet_g })
    }

    fn lower_mul(&self, l: &[f64], z: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            out[i] = (0..=i).map(|j| l[i * self.dim + j] * z[j]).sum();
        }
    }

    /// `|L⁻¹ r|²` by forward substitution.
    fn mahalanobis(&self, l: &[f64], r: &[f64], work: &mut [f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            let s: f64 = (0..i).map(|j| l[i * d + j] * work[j]).sum();
            work[i] = (r[i] - s) / l[i * d + i];
            acc += work[i] * work[i];
        }
        acc
    }

    /// One symmetrised draw of `max(0, 1 − g/f)` under `f` and `max(0, 1 − f/g)` under `g`.
    fn draw<R: Rng + ?Sized>(&self, mean_f: &[f64], mean_g: &[f64], rng: &mut R) -> f64 {
        let d = self.dim;
        let mut z = vec![0.0; d];
        let mut y = vec![0.0; d];
        let mut r = vec![0.0; d];
        let mut work = vec![0.0; d];

        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        self.lower_mul(&self.lf, &z, &mut y);
        let zf: f64 = z.iter().map(|v| v * v).sum();
        for i in 0..d {
            r[i] = y[i] + mean_f[i] - mean_g[i];
        }
        let log_ratio = -0.5 * self.mahalanobis(&self.lg, &r, &mut work) - self.half_logdet_g
            + 0.5 * zf
            + self.half_logdet_f;
        let under_f = (1.0 - log_ratio.exp()).max(0.0);

        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        self.lower_mul(&self.lg, &z, &mut y);
        let zg: f64 = z.iter().map(|v| v * v).sum();
        for i in 0..d {
            r[i] = y[i] + mean_g[i] - mean_f[i];
        }
        let log_ratio = -0.5 * self.mahalanobis(&self.lf, &r, &mut work) - self.half_logdet_f
            + 0.5 * zg
            + self.half_logdet_g;
        let under_g = (1.0 - log_ratio.exp()).max(0.0);

        0.5 * (under_f + under_g)
    }
}

/// Monte Carlo total variation between two multivariate normals, averaging
/// `E_f[max(0, 1 − g/f)]` and `E_g[max(0, 1 − f/g)]`.
pub fn tv_gaussians_mc(
    mean1: &[f64],
    cov1: &DMatrix<f64>,
    mean2: &[f64],
    cov2: &DMatrix<f64>,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let d = mean1.len();
    if mean2.len() != d || cov1.shape() != (d, d) || cov2.shape() != (d, d) || d == 0 {
        return Err(invalid("dimension mismatch"));
    }
    if samples == 0 {
        return Err(invalid("at least one sample is required"));
    }
    let pair = GaussianPair::new(cov1.clone(), cov2.clone())
        .ok_or_else(|| invalid("covariances must be positive definite"))?;
    Ok(chunked_monte_carlo(samples, seed, |rng| pair.draw(mean1, mean2, rng)))
}

/// Solves `V = A V Aᵀ + Q` by the doubling iteration.
pub fn discrete_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut v = q.clone();
    let mut ak = a.clone();
    for _ in 0..200 {
        v = &v + &ak * &v * ak.transpose();
        ak = &ak * &ak;
        if ak.amax() < 1e-13 {
            return Ok(symmetrize(v));
        }
        if !ak.amax().is_finite() {
            break;
        }
    }
    Err(Error::NotStationary)
}

fn symmetrize(v: DMatrix<f64>) -> DMatrix<f64> {
    (&v + v.transpose()) * 0.5
}

fn matrix_power(a: &DMatrix<f64>, mut k: usize) -> DMatrix<f64> {
    let mut result = DMatrix::identity(a.nrows(), a.ncols());
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    result
}

/// Stationary covariance of the lag-state vector `(X_t, ..., X_{t−q+1})`.
pub fn stationary_state_covariance(surrogate: &GaussianArSurrogate) -> Result<DMatrix<f64>> {
    let q = surrogate.order();
    let a = companion_matrix(&surrogate.phi);
    let mut noise = DMatrix::zeros(q, q);
    noise[(0, 0)] = surrogate.sigma * surrogate.sigma;
    discrete_lyapunov(&a, &noise)
}

/// `E_{x∼π} TV(P^lag(x, ·), π)` for the q-dimensional lag-state chain.
///
/// The lag-`lag` transition is `N(A^lag x, V − A^lag V A^lagᵀ)`, which is
/// singular for `lag < q`.
pub fn beta_state_chain(
    surrogate: &GaussianArSurrogate,
    lag: usize,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let q = surrogate.order();
    if lag < q || lag == 0 {
        return Err(Error::SingularTransition { lag, order: q });
    }
    if samples == 0 {
        return Err(invalid("at least one sample is required"));
    }
    if surrogate.phi.as_slice().iter().all(|&c| c == 0.0) {
        return Ok(MonteCarloEstimate { mean: 0.0, std_error: 0.0, samples });
    }
    let v_inf = stationary_state_covariance(surrogate)?;
    let a_lag = matrix_power(&companion_matrix(&surrogate.phi), lag);
    let v_lag = symmetrize(&v_inf - &a_lag * &v_inf * a_lag.transpose());
    let pair = GaussianPair::new(v_lag, v_inf).ok_or(Error::SingularTransition { lag, order: q })?;
    let zeros = vec![0.0; q];
    Ok(chunked_monte_carlo(samples, seed, |rng| {
        let z: Vec<f64> = (0..q).map(|_| rng.sample(StandardNormal)).collect();
        let mut x = vec![0.0; q];
        pair.lower_mul(&pair.lg, &z, &mut x);
        let mean = &a_lag * DVector::from_column_slice(&x);
        pair.draw(mean.as_slice(), &zeros, rng)
    }))
}

/// Scalar-process β(m) of a Gaussian AR(q) surrogate by Monte Carlo.
pub fn beta_arq(surrogate: &GaussianArSurrogate, m: usize, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if m == 0 {
        return Err(invalid("lag must be at least 1"));
    }
    beta_state_chain(surrogate, m + surrogate.order() - 1, samples, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum BetaMethod {
    Quadrature { points: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BetaEntry {
    pub m: usize,
    /// Value as computed, clamped to [0, 1].
    pub raw: f64,
    pub std_error: Option<f64>,
    /// Running minimum of `raw` over lags up to `m`.
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixingProfile {
    pub surrogate: GaussianArSurrogate,
    pub method: BetaMethod,
    pub entries: Vec<BetaEntry>,
}

impl MixingProfile {
    /// Builds a profile from raw values, applying the isotonic running minimum.
    pub fn from_raw(
        surrogate: GaussianArSurrogate,
        method: BetaMethod,
        mut raw: Vec<(usize, f64, Option<f64>)>,
    ) -> Result<Self> {
        raw.sort_by_key(|r| r.0);
        if raw.windows(2).any(|w| w[0].0 == w[1].0) || raw.iter().any(|r| r.0 == 0) {
            return Err(invalid("lags must be distinct and positive"));
        }
        let mut running = 1.0_f64;
        let entries = raw
            .into_iter()
            .map(|(m, value, std_error)| {
                let raw = clamp01(value);
                running = running.min(raw);
                BetaEntry { m, raw, std_error, beta: running }
            })
            .collect();
        Ok(MixingProfile { surrogate, method, entries })
    }

    pub fn beta(&self, m: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.m == m).map(|e| e.beta)
    }
}

/// β(m) for each requested lag. Quadrature needs an AR(1) surrogate; each
/// Monte Carlo lag uses its own seed derived from the base seed.
pub fn mixing_profile(
    surrogate: &GaussianArSurrogate,
    lags: &[usize],
    method: BetaMethod,
) -> Result<MixingProfile> {
    let raw = crate::par::map_indexed(lags.len(), |k| {
        let m = lags[k];
        match method {
            BetaMethod::Quadrature { points } => beta_ar1(surrogate, m, points).map(|b| (m, b, None)),
            BetaMethod::MonteCarlo { samples, seed } => {
                beta_arq(surrogate, m, samples, lag_seed(seed, m)).map(|e| (m, e.mean, Some(e.std_error)))
            }
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    MixingProfile::from_raw(surrogate.clone(), method, raw)
}

fn lag_seed(seed: u64, m: usize) -> u64 {
    seed ^ (m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockChoice {
    pub m: usize,
    pub mu: usize,
    pub eta: f64,
    pub beta: f64,
    /// `η − 4(μ − 1)β(m)`
    pub eta_prime: f64,
    pub feasible: bool,
}

pub fn adjusted_level(eta: f64, mu: usize, beta: f64) -> f64 {
    eta - 4.0 * (mu as f64 - 1.0) * beta
}

/// Every profiled lag with `μ = ⌊n/2m⌋ ≥ 1`, sorted by m, flagged feasible
/// when the adjusted confidence level stays positive.
pub fn plan_blocks(n: usize, eta: f64, profile: &MixingProfile) -> Result<Vec<BlockChoice>> {
    if n < 4 {
        return Err(invalid("block planning needs n >= 4"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid("eta must lie in (0, 1)"));
    }
    Ok(profile
        .entries
        .iter()
        .filter_map(|e| {
            let mu = n / (2 * e.m);
            (mu >= 1).then(|| {
                let eta_prime = adjusted_level(eta, mu, e.beta);
                BlockChoice { m: e.m, mu, eta, beta: e.beta, eta_prime, feasible: eta_prime > 0.0 }
            })
        })
        .collect())
}
