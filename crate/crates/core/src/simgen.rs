//! Synthetic stationary AR paths and the bound-coverage experiment.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
#[allow(unused_imports)]
use num_traits::Float;

use crate::armodel::{build_design, fit_design, residuals, truncated_loss};
use crate::complexity::{block_indices, IndexCount};
use crate::error::{invalid, Error, Result};
use crate::mixing::{mixing_profile, plan_blocks, BetaMethod, BlockChoice, GaussianArSurrogate};
use crate::par;
use crate::riskbound::{bound_ar1, bound_arp, confidence_term};
use crate::stability::{hull_vertices, is_stationary, CoefVector};
use crate::stats::substream;
use crate::timeseries::GrowthSeries;

/// How the pre-sample lags are initialised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Init {
    /// Zero lags followed by the burn-in.
    #[default]
    Zero,
    /// Lags drawn from the exact stationary law (AR(1) only).
    Stationary,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimSpec {
    pub phi: CoefVector,
    pub sigma: f64,
    pub n: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub init: Init,
}

impl SimSpec {
    /// Spec with the default burn-in of `100·p` and zero initial lags.
    pub fn new(phi: Vec<f64>, sigma: f64, n: usize, seed: u64) -> Result<Self> {
        let phi = CoefVector::new(phi)?;
        let burn_in = 100 * phi.order();
        let spec = SimSpec { phi, sigma, n, burn_in, seed, init: Init::Zero };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(invalid("innovation standard deviation must be positive"));
        }
        if self.n == 0 {
            return Err(invalid("series length must be positive"));
        }
        if !is_stationary(&self.phi, 0.0) {
            return Err(Error::NotStationary);
        }
        if self.init == Init::Stationary && self.phi.order() != 1 {
            return Err(invalid("stationary initialisation is only available for AR(1)"));
        }
        Ok(())
    }
}

/// Gaussian AR path of length `spec.n`; the first `burn_in` draws are
/// discarded. Deterministic in `spec.seed`.
pub fn simulate(spec: &SimSpec) -> Result<GrowthSeries> {
    spec.validate()?;
    let mut rng = substream(spec.seed, 0);
    let values = simulate_path(spec, spec.n, &mut rng);
    GrowthSeries::from_values(values, format!("simulated AR({}) seed {}", spec.phi.order(), spec.seed))
}

pub(crate) fn simulate_path(spec: &SimSpec, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let phi = spec.phi.as_slice();
    let p = phi.len();
    let total = p + spec.burn_in + len;
    let mut x = vec![0.0; total];
    if spec.init == Init::Stationary {
        let sd = spec.sigma / (1.0 - phi[0] * phi[0]).sqrt();
        x[0] = sd * rng.sample::<f64, _>(StandardNormal);
    }
    for t in p..total {
        let mut v = spec.sigma * rng.sample::<f64, _>(StandardNormal);
        for (k, f) in phi.iter().enumerate() {
            v += f * x[t - 1 - k];
        }
        x[t] = v;
    }
    x.split_off(p + spec.burn_in)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoverageConfig {
    /// True process; `spec.n` is the training length and `spec.seed` the base seed.
    pub spec: SimSpec,
    pub p_fit: usize,
    pub cap: f64,
    pub eta: f64,
    pub replicates: usize,
    pub holdout: usize,
    /// Candidate block lengths.
    pub lags: Vec<usize>,
    /// Monte Carlo draws per lag when the true order exceeds 1.
    pub beta_samples: usize,
    pub index_count: IndexCount,
    pub margin: f64,
}

impl CoverageConfig {
    pub fn new(spec: SimSpec, p_fit: usize, cap: f64, eta: f64, replicates: usize, holdout: usize) -> Self {
        CoverageConfig {
            spec,
            p_fit,
            cap,
            eta,
            replicates,
            holdout,
            lags: (1..=64).collect(),
            beta_samples: 20_000,
            index_count: IndexCount::Mu,
            margin: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoverageResult {
    /// Replicates that produced a bound.
    pub replicates: usize,
    /// Held-out truncated risk above `bound_total`.
    pub violations: usize,
    /// Replicates without a feasible block plan.
    pub skipped: usize,
    /// `violations / replicates`, or 0 when nothing was evaluated.
    pub violation_rate: f64,
    pub eta: f64,
    pub cap: f64,
    pub p_fit: usize,
    pub plan: Option<BlockChoice>,
    pub mean_bound: f64,
    pub mean_train_error: f64,
    pub mean_holdout_risk: f64,
}

struct Replicate {
    bound: f64,
    train_error: f64,
    holdout_risk: f64,
}

/// Feasible choice with the smallest confidence term; ties go to smaller m.
fn tightest_choice(choices: &[BlockChoice], cap: f64) -> Option<BlockChoice> {
    let mut best: Option<(BlockChoice, f64)> = None;
    for c in choices.iter().filter(|c| c.feasible) {
        let Ok(term) = confidence_term(cap, c.mu, c.eta_prime) else { continue };
        if best.is_none_or(|(_, b)| term < b) {
            best = Some((*c, term));
        }
    }
    best.map(|(c, _)| c)
}

/// Empirical check of the bound's probability statement.
///
/// Every replicate simulates `n + holdout` points, fits AR(`p_fit`) on the
/// first `n`, bounds its risk with β taken from the true process, and
/// compares against the mean truncated loss of one-step forecasts on the
/// held-out tail.
pub fn coverage_experiment(config: &CoverageConfig) -> Result<CoverageResult> {
    let spec = &config.spec;
    spec.validate()?;
    if config.replicates == 0 {
        return Err(invalid("at least one replicate is required"));
    }
    if config.holdout < 100 {
        return Err(invalid("holdout must be at least 100"));
    }
    if config.p_fit == 0 {
        return Err(Error::ZeroOrder);
    }
    if spec.n <= 2 * config.p_fit {
        return Err(Error::SeriesTooShort { n: spec.n, p: config.p_fit });
    }
    let truth = GaussianArSurrogate::new(spec.phi.clone(), spec.sigma)?;
    let method = if truth.order() == 1 {
        BetaMethod::Quadrature { points: 200 }
    } else {
        BetaMethod::MonteCarlo { samples: config.beta_samples, seed: spec.seed }
    };
    let lags: Vec<usize> = config.lags.iter().copied().filter(|&m| m >= 1 && 2 * m <= spec.n).collect();
    let profile = mixing_profile(&truth, &lags, method)?;
    let choice = tightest_choice(&plan_blocks(spec.n, config.eta, &profile)?, config.cap);

    let Some(choice) = choice else {
        return Ok(CoverageResult {
            replicates: 0,
            violations: 0,
            skipped: config.replicates,
            violation_rate: 0.0,
            eta: config.eta,
            cap: config.cap,
            p_fit: config.p_fit,
            plan: None,
            mean_bound: f64::NAN,
            mean_train_error: f64::NAN,
            mean_holdout_risk: f64::NAN,
        });
    };
    let plan = block_indices(spec.n, config.p_fit, choice.m, choice.mu, config.index_count)?;
    let poly = hull_vertices(config.p_fit)?;

    let outcomes = par::map_indexed(config.replicates, |r| -> Result<Replicate> {
        let mut rng = substream(spec.seed, r as u64 + 1);
        let path = simulate_path(spec, spec.n + config.holdout, &mut rng);
        let train = GrowthSeries::from_values(path[..spec.n].to_vec(), "coverage replicate")?;
        let design = build_design(&train, config.p_fit)?;
        let fit = fit_design(&design, config.cap, config.margin)?;
        let report = if config.p_fit == 1 {
            bound_ar1(&fit, &design, &plan, config.cap, config.eta, choice.beta)?
        } else {
            bound_arp(&fit, &design, &plan, &poly, config.cap, config.eta, choice.beta)?
        };
        let held = residuals(&path, &fit.coef, spec.n)?;
        let holdout_risk = held.iter().map(|&e| truncated_loss(e, config.cap)).sum::<f64>() / held.len() as f64;
        Ok(Replicate { bound: report.bound_total, train_error: fit.train_error, holdout_risk })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let count = outcomes.len();
    let violations = outcomes.iter().filter(|o| o.holdout_risk > o.bound).count();
    let mean = |f: fn(&Replicate) -> f64| outcomes.iter().map(f).sum::<f64>() / count as f64;
    Ok(CoverageResult {
        replicates: count,
        violations,
        skipped: 0,
        violation_rate: violations as f64 / count as f64,
        eta: config.eta,
        cap: config.cap,
        p_fit: config.p_fit,
        plan: Some(choice),
        mean_bound: mean(|o| o.bound),
        mean_train_error: mean(|o| o.train_error),
        mean_holdout_risk: mean(|o| o.holdout_risk),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mean_var;

    #[test]
    fn white_noise_variance() {
        let n = 20_000;
        let s = simulate(&SimSpec::new(vec![0.0], 1.0, n, 1).unwrap()).unwrap();
        let (_, var) = mean_var(s.values());
        assert!((var - 1.0).abs() < 3.0 / (n as f64).sqrt() * 2.0_f64.sqrt());
    }

    #[test]
    fn ar1_lag_one_autocorrelation() {
        let n = 1_000_000;
        let s = simulate(&SimSpec::new(vec![0.5], 1.0, n, 2).unwrap()).unwrap();
        let v = s.values();
        let (mean, var) = mean_var(v);
        let cov: f64 = v.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / n as f64;
        assert!((cov / var - 0.5).abs() < 0.005);
    }

    #[test]
    fn seeded_determinism() {
        let spec = SimSpec::new(vec![0.3, 0.1], 2.0, 500, 77).unwrap();
        assert_eq!(simulate(&spec).unwrap(), simulate(&spec).unwrap());
        let other = SimSpec { seed: 78, ..spec.clone() };
        assert_ne!(simulate(&spec).unwrap(), simulate(&other).unwrap());
    }

    #[test]
    fn rejects_invalid_specs() {
        assert_eq!(SimSpec::new(vec![1.0], 1.0, 10, 0).unwrap_err(), Error::NotStationary);
        assert!(SimSpec::new(vec![0.5], 0.0, 10, 0).is_err());
        assert!(SimSpec::new(vec![0.5], 1.0, 0, 0).is_err());
        let mut spec = SimSpec::new(vec![0.5, 0.1], 1.0, 10, 0).unwrap();
        spec.init = Init::Stationary;
        assert!(simulate(&spec).is_err());
    }

    #[test]
    fn variance_stable_across_burn_in() {
        let base = SimSpec::new(vec![0.9], 1.0, 200_000, 4).unwrap();
        let mut longer = base.clone();
        longer.burn_in *= 2;
        let (_, v1) = mean_var(simulate(&base).unwrap().values());
        let (_, v2) = mean_var(simulate(&longer).unwrap().values());
        let ratio = v1 / v2;
        assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
        // stationary variance 1 / (1 - 0.81)
        assert!((v1 - 1.0 / 0.19).abs() < 0.3);
    }

    #[test]
    fn stationary_start_has_stationary_first_draw() {
        let mut spec = SimSpec::new(vec![0.95], 1.0, 1, 0).unwrap();
        spec.burn_in = 0;
        spec.init = Init::Stationary;
        let firsts: Vec<f64> = (0..4000)
            .map(|s| simulate(&SimSpec { seed: s, ..spec.clone() }).unwrap().values()[0])
            .collect();
        let (_, var) = mean_var(&firsts);
        let target = 1.0 / (1.0 - 0.95 * 0.95);
        assert!((var / target - 1.0).abs() < 0.1, "var {var} target {target}");
    }

    fn small_config(n: usize, replicates: usize) -> CoverageConfig {
        let spec = SimSpec::new(vec![0.5, -0.3], 1.0, n, 9).unwrap();
        let mut c = CoverageConfig::new(spec, 2, 10.0, 0.05, replicates, 200);
        c.lags = (1..=16).collect();
        c.beta_samples = 4000;
        c
    }

    #[test]
    fn coverage_holds_on_small_grid() {
        let r = coverage_experiment(&small_config(1024, 40)).unwrap();
        assert_eq!(r.replicates, 40);
        assert_eq!(r.skipped, 0);
        assert_eq!(r.violation_rate, r.violations as f64 / 40.0);
        assert!(r.violation_rate <= 0.05);
        assert!(r.mean_bound > r.mean_holdout_risk);
    }

    #[test]
    fn coverage_is_deterministic() {
        let c = small_config(512, 6);
        assert_eq!(coverage_experiment(&c).unwrap(), coverage_experiment(&c).unwrap());
    }

    #[test]
    fn saturated_cap_gives_risks_near_cap() {
        let spec = SimSpec::new(vec![0.3], 1.0, 2000, 3).unwrap();
        let mut c = CoverageConfig::new(spec, 1, 1e-6, 0.05, 8, 200);
        c.lags = (1..=8).collect();
        let r = coverage_experiment(&c).unwrap();
        assert!((r.mean_train_error / 1e-6 - 1.0).abs() < 0.01);
        assert!((r.mean_holdout_risk / 1e-6 - 1.0).abs() < 0.02);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn longer_samples_tighten_the_bound() {
        let short = coverage_experiment(&small_config(1024, 8)).unwrap();
        let long = coverage_experiment(&small_config(2048, 8)).unwrap();
        assert!(long.mean_bound < short.mean_bound);
    }

    #[test]
    fn coverage_preconditions() {
        let mut c = small_config(512, 1);
        c.holdout = 99;
        assert!(coverage_experiment(&c).is_err());
        let mut c = small_config(512, 0);
        c.holdout = 100;
        assert!(coverage_experiment(&c).is_err());
    }

    #[test]
    fn no_feasible_plan_skips_every_replicate() {
        let spec = SimSpec::new(vec![0.999], 1.0, 200, 1).unwrap();
        let mut c = CoverageConfig::new(spec, 1, 1.0, 0.01, 5, 100);
        c.lags = vec![1, 2];
        let r = coverage_experiment(&c).unwrap();
        assert_eq!((r.replicates, r.skipped, r.violation_rate), (0, 5, 0.0));
    }
}
