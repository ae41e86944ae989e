//! Lagged design matrices, least-squares fits and the stationarity constraint.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::stability::{is_stationary, project_into_hull, CoefVector};
use crate::timeseries::GrowthSeries;

/// Lagged regressors for an AR(p) fit.
///
/// Row `r` (0-based) holds `(X_{p+r}, X_{p+r-1}, ..., X_{r+1})` and its target
/// is `X_{p+r+1}`, with the series indexed from 1; so design row `i` in the
/// 1-based convention of the block index sets predicts `X_{p+i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
    pub p: usize,
    pub n: usize,
}

impl Design {
    pub fn rows(&self) -> usize {
        self.y.len()
    }

    /// Inner product of 0-based row `r` with `phi`.
    pub fn row_dot(&self, r: usize, phi: &[f64]) -> f64 {
        phi.iter().enumerate().map(|(c, f)| self.x[(r, c)] * f).sum()
    }
}

pub fn build_design(series: &GrowthSeries, p: usize) -> Result<Design> {
    build_design_from(series.values(), p)
}

pub(crate) fn build_design_from(v: &[f64], p: usize) -> Result<Design> {
    let n = v.len();
    if p == 0 {
        return Err(Error::ZeroOrder);
    }
    if n <= p {
        return Err(Error::SeriesTooShort { n, p });
    }
    let rows = n - p;
    let x = DMatrix::from_fn(rows, p, |r, c| v[p + r - 1 - c]);
    let y = v[p..].to_vec();
    Ok(Design { x, y, p, n })
}

/// Least squares through a Householder QR of the design; the rank check runs
/// on the singular values of the triangular factor.
pub fn ols_fit(d: &Design) -> Result<CoefVector> {
    let p = d.p;
    let qr = d.x.clone().qr();
    let r = qr.r();
    let sv = r.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin <= 1e-10 * smax {
        let condition = if smax > 0.0 { smin / smax } else { 0.0 };
        return Err(Error::RankDeficient { condition });
    }
    let mut qty = DVector::from_column_slice(&d.y);
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, p).into_owned();
    let phi = r
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficient { condition: smin / smax })?;
    CoefVector::new(phi.iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FittedAR {
    pub p: usize,
    /// Coefficients after the stationarity projection.
    pub coef: CoefVector,
    /// Unconstrained least-squares coefficients.
    pub ols_coef: CoefVector,
    /// Residual sum of squares over the `n - p` design rows (untruncated).
    pub rss: f64,
    /// `rss / (n - p)`.
    pub sigma2: f64,
    /// Mean truncated squared loss over the design rows.
    pub train_error: f64,
    pub cap: f64,
    pub margin: f64,
    pub stationary_before_projection: bool,
}

impl FittedAR {
    pub fn predict(&self, history: &[f64]) -> Result<f64> {
        predict(&self.coef, history)
    }

    pub fn projection_engaged(&self) -> bool {
        !self.stationary_before_projection
    }
}

/// `min(r², cap)`
pub fn truncated_loss(residual: f64, cap: f64) -> f64 {
    (residual * residual).min(cap)
}

/// OLS fit shrunk into the stationarity domain, with training error measured
/// under squared loss truncated at `cap`.
pub fn fit_stationary(series: &GrowthSeries, p: usize, cap: f64, margin: f64) -> Result<FittedAR> {
    if !(cap > 0.0) {
        return Err(invalid("loss cap must be positive"));
    }
    let design = build_design(series, p)?;
    fit_design(&design, cap, margin)
}

pub(crate) fn fit_design(design: &Design, cap: f64, margin: f64) -> Result<FittedAR> {
    let ols_coef = ols_fit(design)?;
    let stationary_before_projection = is_stationary(&ols_coef, margin);
    let coef = project_into_hull(&ols_coef, margin)?;
    let rows = design.rows();
    let mut rss = 0.0;
    let mut truncated = 0.0;
    for r in 0..rows {
        let e = design.y[r] - design.row_dot(r, coef.as_slice());
        rss += e * e;
        truncated += truncated_loss(e, cap);
    }
    Ok(FittedAR {
        p: design.p,
        coef,
        ols_coef,
        rss,
        sigma2: rss / rows as f64,
        train_error: truncated / rows as f64,
        cap,
        margin,
        stationary_before_projection,
    })
}

/// One-step forecast `Σ φ_k · history[len - k]`.
pub fn predict(coef: &CoefVector, history: &[f64]) -> Result<f64> {
    let p = coef.order();
    if history.len() < p {
        return Err(invalid("history shorter than the model order"));
    }
    Ok(coef
        .as_slice()
        .iter()
        .zip(history.iter().rev())
        .map(|(f, x)| f * x)
        .sum())
}

/// Residuals `X_t - X̂_t` for 0-based targets `t` in `first_target..n`.
pub fn residuals(values: &[f64], coef: &CoefVector, first_target: usize) -> Result<Vec<f64>> {
    let p = coef.order();
    if first_target < p {
        return Err(invalid("first target precedes the available history"));
    }
    (first_target..values.len())
        .map(|t| predict(coef, &values[t - p..t]).map(|hat| values[t] - hat))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{simulate, SimSpec};
    use alloc::vec;
    use proptest::prelude::*;

    fn series(v: &[f64]) -> GrowthSeries {
        GrowthSeries::from_values(v.to_vec(), "t").unwrap()
    }

    #[test]
    fn design_layout() {
        let d = build_design(&series(&[1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        assert_eq!(d.x, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 3.0, 2.0]));
        assert_eq!(d.y, vec![3.0, 4.0]);
        let d1 = build_design(&series(&[1.0, 2.0, 3.0, 4.0, 5.0]), 1).unwrap();
        assert_eq!(d1.rows(), 4);
        assert_eq!(build_design(&series(&[1.0, 2.0]), 2), Err(Error::SeriesTooShort { n: 2, p: 2 }));
        assert_eq!(build_design(&series(&[1.0, 2.0]), 0), Err(Error::ZeroOrder));
    }

    #[test]
    fn exact_recovery() {
        let mut v = vec![1.0];
        for _ in 0..30 {
            let last = *v.last().unwrap();
            v.push(0.5 * last);
        }
        let phi = ols_fit(&build_design(&series(&v), 1).unwrap()).unwrap();
        assert!((phi.as_slice()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_target_gives_zero() {
        // x = (1, 0, -1, 0): lag column (1, 0, -1) vs target (0, -1, 0)
        let d = build_design(&series(&[1.0, 0.0, -1.0, 0.0]), 1).unwrap();
        assert_eq!(ols_fit(&d).unwrap().as_slice(), &[0.0]);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let d = build_design(&series(&[0.0; 10]), 2).unwrap();
        assert!(matches!(ols_fit(&d), Err(Error::RankDeficient { .. })));
        let d = build_design(&series(&[1.0; 10]), 2).unwrap();
        assert!(matches!(ols_fit(&d), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn long_ar2_is_consistent() {
        let spec = SimSpec::new(vec![0.5, -0.3], 1.0, 100_000, 11).unwrap();
        let s = simulate(&spec).unwrap();
        let phi = ols_fit(&build_design(&s, 2).unwrap()).unwrap();
        assert!((phi.as_slice()[0] - 0.5).abs() < 0.02);
        assert!((phi.as_slice()[1] + 0.3).abs() < 0.02);
    }

    #[test]
    fn white_noise_fit() {
        let s = simulate(&SimSpec::new(vec![0.0], 1.0, 5000, 3).unwrap()).unwrap();
        let fit = fit_stationary(&s, 1, 100.0, 1e-3).unwrap();
        assert!(fit.coef.as_slice()[0].abs() < 0.05);
        let (_, var) = crate::stats::mean_var(s.values());
        assert!((fit.train_error - var).abs() < 0.05);
        let capped = fit_stationary(&s, 1, 0.5, 1e-3).unwrap();
        assert!(capped.train_error <= 0.5);
    }

    #[test]
    fn explosive_data_engages_projection() {
        let mut v = vec![1.0];
        let mut state = 12345u64;
        for _ in 0..200 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let noise = ((state >> 33) as f64 / (1u64 << 31) as f64) - 0.5;
            let last = *v.last().unwrap();
            v.push(1.05 * last + 0.1 * noise);
        }
        let fit = fit_stationary(&series(&v), 1, 1e12, 1e-3).unwrap();
        assert!(!fit.stationary_before_projection);
        assert!(fit.ols_coef.as_slice()[0] > 1.0);
        assert!(is_stationary(&fit.coef, 1e-3));
    }

    #[test]
    fn predict_examples() {
        let one = CoefVector::new(vec![1.0]).unwrap();
        assert_eq!(predict(&one, &[9.0, 3.7]).unwrap(), 3.7);
        let two = CoefVector::new(vec![0.5, 0.25]).unwrap();
        assert_eq!(predict(&two, &[100.0, 4.0, 2.0]).unwrap(), 2.0);
        let zero = CoefVector::zeros(3).unwrap();
        assert_eq!(predict(&zero, &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(predict(&two, &[1.0]).is_err());
    }

    #[test]
    fn residuals_are_orthogonal_to_columns() {
        let s = simulate(&SimSpec::new(vec![0.4, 0.2, -0.1], 1.0, 2000, 5).unwrap()).unwrap();
        let d = build_design(&s, 3).unwrap();
        let phi = ols_fit(&d).unwrap();
        let res = residuals(s.values(), &phi, 3).unwrap();
        let ynorm = d.y.iter().map(|y| y * y).sum::<f64>().sqrt();
        for c in 0..3 {
            let col = d.x.column(c);
            let dot: f64 = col.iter().zip(&res).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-8 * ynorm * col.norm());
        }
    }

    proptest! {
        #[test]
        fn nested_rss_on_common_rows(seed in 0u64..1000, p in 1usize..5, extra in 1usize..4) {
            let s = simulate(&SimSpec::new(vec![0.3], 1.0, 300, seed).unwrap()).unwrap();
            let q = p + extra;
            // both fits on targets q..n
            let v = s.values();
            let small = build_design_from(&v[q - p..], p).unwrap();
            let big = build_design_from(v, q).unwrap();
            prop_assert_eq!(small.y.clone(), big.y.clone());
            let rss = |d: &Design| {
                let phi = ols_fit(d).unwrap();
                (0..d.rows()).map(|r| (d.y[r] - d.row_dot(r, phi.as_slice())).powi(2)).sum::<f64>()
            };
            prop_assert!(rss(&big) <= rss(&small) * (1.0 + 1e-12));
        }

        #[test]
        fn fit_is_always_stationary(seed in 0u64..500, p in 1usize..6, scale in 0.9f64..1.2) {
            // near-unit-root path: AR(1) at 0.99 with random scale
            let s = simulate(&SimSpec::new(vec![0.99], 1.0, 400, seed).unwrap()).unwrap();
            let v: Vec<f64> = s.values().iter().enumerate().map(|(i, x)| x * scale.powi((i % 3) as i32)).collect();
            let fit = fit_stationary(&series(&v), p, 10.0, 1e-3).unwrap();
            prop_assert!(is_stationary(&fit.coef, 1e-3));
            prop_assert!(fit.train_error >= 0.0 && fit.train_error <= 10.0);
        }

        #[test]
        fn predict_is_linear(h in proptest::collection::vec(-5.0f64..5.0, 3..10), a in -3.0f64..3.0) {
            let c = CoefVector::new(vec![0.3, -0.2, 0.1]).unwrap();
            let scaled: Vec<f64> = h.iter().map(|x| a * x).collect();
            let lhs = predict(&c, &scaled).unwrap();
            let rhs = a * predict(&c, &h).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
