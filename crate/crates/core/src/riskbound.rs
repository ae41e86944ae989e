//! Generalization bounds for fitted AR models and order selection.
//!
//! With probability at least `1 − η`, the truncated squared-error risk of a
//! stationary AR(p) fit is at most
//!
//! ```text
//! train_error
//!   + 4 √(π M ln(p+1)) / μ · max_{j,j'} (Σ_{i∈I} ⟨X_i, φ_j − φ_j'⟩²)^{1/2}   (p ≥ 2)
//!   + 3 M √(ln(4/η′) / 2μ)
//! ```
//!
//! and for p = 1 the middle term is `(4/μ) √(M/2) (Σ_{i∈I} X_i²)^{1/2}`.
//! Here `η′ = η − 4(μ − 1)β(m)`.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)]
use num_traits::Float;

use crate::armodel::{build_design, fit_design, residuals, Design, FittedAR};
use crate::complexity::{ar1_complexity_term, block_indices, max_vertex_pair_norm, BlockPlan, IndexCount};
use crate::error::{invalid, Error, Result};
use crate::mixing::{adjusted_level, plan_blocks, BlockChoice, MixingProfile};
use crate::par;
use crate::stability::{hull_vertices, StabilityPolytope};
use crate::timeseries::GrowthSeries;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RiskBoundReport {
    pub p: usize,
    pub train_error: f64,
    pub complexity_term: f64,
    pub confidence_term: f64,
    /// Exactly `train_error + complexity_term + confidence_term`.
    pub bound_total: f64,
    pub cap: f64,
    pub eta: f64,
    pub eta_prime: f64,
    pub m: usize,
    pub mu: usize,
    pub points_used: usize,
    /// For p = 1, the vertex-pair complexity term the p ≥ 2 formula would give.
    pub vertex_form_complexity: Option<f64>,
    pub notes: Vec<String>,
}

/// `3M √(ln(4/η′) / 2μ)`
pub fn confidence_term(cap: f64, mu: usize, eta_prime: f64) -> Result<f64> {
    if !(cap > 0.0) {
        return Err(invalid("loss cap must be positive"));
    }
    if mu == 0 {
        return Err(invalid("block count must be positive"));
    }
    if !(eta_prime > 0.0 && eta_prime < 1.0) {
        return Err(invalid("adjusted confidence level must lie in (0, 1)"));
    }
    Ok(3.0 * cap * ((4.0 / eta_prime).ln() / (2.0 * mu as f64)).sqrt())
}

/// Leading factor `4 √(π M ln(p+1)) / μ` of the p ≥ 2 complexity term.
pub fn complexity_constant(cap: f64, p: usize, mu: usize) -> f64 {
    4.0 * (core::f64::consts::PI * cap * (p as f64 + 1.0).ln()).sqrt() / mu as f64
}

fn check_common(fit: &FittedAR, design: &Design, plan: &BlockPlan, cap: f64, eta: f64, beta_m: f64) -> Result<f64> {
    if fit.p != design.p || plan.p != design.p {
        return Err(invalid("fit, design and block plan orders differ"));
    }
    if fit.cap != cap {
        return Err(invalid("fit was truncated at a different loss cap"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid("eta must lie in (0, 1)"));
    }
    if !(0.0..=1.0).contains(&beta_m) {
        return Err(invalid("beta must lie in [0, 1]"));
    }
    let eta_prime = adjusted_level(eta, plan.mu, beta_m);
    if !(eta_prime > 0.0) {
        return Err(Error::InfeasiblePlan { best_eta_prime: eta_prime, m: plan.m });
    }
    Ok(eta_prime)
}

fn notes_for(fit: &FittedAR, plan: &BlockPlan) -> Vec<String> {
    let mut notes = vec![
        String::from("index offset reads the block-length symbol as m"),
        String::from(match plan.index_count {
            IndexCount::Mu => "index set has mu points",
            IndexCount::MuPlusOne => "index set has mu + 1 points",
        }),
    ];
    if plan.m == 1 {
        notes.push(String::from("index offset raised from 0 to 1"));
    }
    if plan.dropped > 0 {
        notes.push(format!("{} block indices beyond the design rows dropped", plan.dropped));
    }
    if fit.projection_engaged() {
        notes.push(String::from("stationarity projection engaged"));
    }
    notes
}

fn assemble(
    fit: &FittedAR,
    plan: &BlockPlan,
    cap: f64,
    eta: f64,
    eta_prime: f64,
    complexity_term: f64,
    vertex_form_complexity: Option<f64>,
) -> Result<RiskBoundReport> {
    let confidence = confidence_term(cap, plan.mu, eta_prime)?;
    Ok(RiskBoundReport {
        p: fit.p,
        train_error: fit.train_error,
        complexity_term,
        confidence_term: confidence,
        bound_total: fit.train_error + complexity_term + confidence,
        cap,
        eta,
        eta_prime,
        m: plan.m,
        mu: plan.mu,
        points_used: plan.indices.len(),
        vertex_form_complexity,
        notes: notes_for(fit, plan),
    })
}

/// Bound for an AR(p) fit with `p ≥ 2`.
pub fn bound_arp(
    fit: &FittedAR,
    design: &Design,
    plan: &BlockPlan,
    poly: &StabilityPolytope,
    cap: f64,
    eta: f64,
    beta_m: f64,
) -> Result<RiskBoundReport> {
    if design.p < 2 {
        return Err(invalid("the vertex-pair bound is stated for p >= 2; use bound_ar1"));
    }
    let eta_prime = check_common(fit, design, plan, cap, eta, beta_m)?;
    let term = complexity_constant(cap, design.p, plan.mu) * max_vertex_pair_norm(design, plan, poly)?;
    assemble(fit, plan, cap, eta, eta_prime, term, None)
}

/// Bound for an AR(1) fit.
pub fn bound_ar1(
    fit: &FittedAR,
    design: &Design,
    plan: &BlockPlan,
    cap: f64,
    eta: f64,
    beta_m: f64,
) -> Result<RiskBoundReport> {
    let eta_prime = check_common(fit, design, plan, cap, eta, beta_m)?;
    let term = ar1_complexity_term(design, plan, cap)?;
    let poly = hull_vertices(1)?;
    let vertex_form = complexity_constant(cap, 1, plan.mu) * max_vertex_pair_norm(design, plan, &poly)?;
    assemble(fit, plan, cap, eta, eta_prime, term, Some(vertex_form))
}

/// `n_eff · ln(RSS / n_eff) + 2(p + 1)`.
pub fn aic(rss: f64, n_effective: usize, p: usize) -> f64 {
    let n = n_effective as f64;
    n * (rss / n).ln() + 2.0 * (p as f64 + 1.0)
}

/// Untruncated RSS of `fit` over the targets `X_{p_max+1}, ..., X_n`, and
/// their count, so that every order is scored on the same rows.
pub fn aligned_rss(series: &GrowthSeries, fit: &FittedAR, p_max: usize) -> Result<(f64, usize)> {
    let res = residuals(series.values(), &fit.coef, p_max)?;
    Ok((res.iter().map(|e| e * e).sum(), res.len()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelectOptions {
    /// Stationarity margin used when projecting the OLS estimates.
    pub margin: f64,
    pub index_count: IndexCount,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions { margin: 1e-3, index_count: IndexCount::Mu }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlanScore {
    pub choice: BlockChoice,
    /// Mean of `bound_total` over p = 1..p_max.
    pub mean_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelectionResult {
    pub per_order: Vec<RiskBoundReport>,
    pub aic_per_order: Vec<(usize, f64)>,
    pub srm_choice: usize,
    pub aic_choice: usize,
    pub plan: BlockChoice,
    pub plan_scores: Vec<PlanScore>,
    pub fits: Vec<FittedAR>,
}

/// Index of the smallest value; ties go to the earliest.
fn argmin(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

struct OrderEvaluation {
    fit: FittedAR,
    aic: f64,
    reports: Vec<RiskBoundReport>,
}

fn evaluate_order(
    series: &GrowthSeries,
    p: usize,
    p_max: usize,
    cap: f64,
    eta: f64,
    choices: &[BlockChoice],
    options: SelectOptions,
) -> Result<OrderEvaluation> {
    let design = build_design(series, p)?;
    let fit = fit_design(&design, cap, options.margin)?;
    let poly = hull_vertices(p)?;
    let reports = choices
        .iter()
        .map(|c| {
            let plan = block_indices(series.n(), p, c.m, c.mu, options.index_count)?;
            if p == 1 {
                bound_ar1(&fit, &design, &plan, cap, eta, c.beta)
            } else {
                bound_arp(&fit, &design, &plan, &poly, cap, eta, c.beta)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (rss, n_eff) = aligned_rss(series, &fit, p_max)?;
    Ok(OrderEvaluation { aic: aic(rss, n_eff, p), fit, reports })
}

fn validate(series: &GrowthSeries, p_max: usize, cap: f64, eta: f64) -> Result<()> {
    if p_max == 0 {
        return Err(Error::ZeroOrder);
    }
    if series.n() <= 2 * p_max {
        return Err(Error::SeriesTooShort { n: series.n(), p: p_max });
    }
    if !(cap > 0.0) {
        return Err(invalid("loss cap must be positive"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid("eta must lie in (0, 1)"));
    }
    Ok(())
}

fn evaluate_all(
    series: &GrowthSeries,
    p_max: usize,
    cap: f64,
    eta: f64,
    choices: &[BlockChoice],
    options: SelectOptions,
) -> Result<Vec<OrderEvaluation>> {
    par::map_indexed(p_max, |k| evaluate_order(series, k + 1, p_max, cap, eta, choices, options))
        .into_iter()
        .collect()
}

/// Bounds for p = 1..p_max under one fixed block choice.
pub fn bound_curve(
    series: &GrowthSeries,
    p_max: usize,
    cap: f64,
    eta: f64,
    choice: &BlockChoice,
    options: SelectOptions,
) -> Result<Vec<RiskBoundReport>> {
    validate(series, p_max, cap, eta)?;
    let evals = evaluate_all(series, p_max, cap, eta, core::slice::from_ref(choice), options)?;
    Ok(evals.into_iter().map(|mut e| e.reports.remove(0)).collect())
}

/// Structural risk minimization over p = 1..p_max.
///
/// One block choice is shared by every order: among the feasible choices of
/// `plan_blocks`, the one with the smallest bound averaged over p.
pub fn srm_select(
    series: &GrowthSeries,
    p_max: usize,
    cap: f64,
    eta: f64,
    profile: &MixingProfile,
    options: SelectOptions,
) -> Result<SelectionResult> {
    validate(series, p_max, cap, eta)?;
    let all = plan_blocks(series.n(), eta, profile)?;
    let choices: Vec<BlockChoice> = all.iter().copied().filter(|c| c.feasible).collect();
    if choices.is_empty() {
        let best = all
            .iter()
            .max_by(|a, b| a.eta_prime.total_cmp(&b.eta_prime))
            .map(|c| (c.eta_prime, c.m))
            .unwrap_or((f64::NEG_INFINITY, 0));
        return Err(Error::InfeasiblePlan { best_eta_prime: best.0, m: best.1 });
    }
    let evals = evaluate_all(series, p_max, cap, eta, &choices, options)?;

    let plan_scores: Vec<PlanScore> = choices
        .iter()
        .enumerate()
        .map(|(c, choice)| PlanScore {
            choice: *choice,
            mean_bound: evals.iter().map(|e| e.reports[c].bound_total).sum::<f64>() / p_max as f64,
        })
        .collect();
    let best = argmin(plan_scores.iter().map(|s| s.mean_bound)).ok_or(Error::InfeasiblePlan {
        best_eta_prime: f64::NAN,
        m: 0,
    })?;

    let mut per_order = Vec::with_capacity(p_max);
    let mut aic_per_order = Vec::with_capacity(p_max);
    let mut fits = Vec::with_capacity(p_max);
    for (k, mut e) in evals.into_iter().enumerate() {
        per_order.push(e.reports.swap_remove(best));
        aic_per_order.push((k + 1, e.aic));
        fits.push(e.fit);
    }
    let srm_choice = argmin(per_order.iter().map(|r| r.bound_total)).map_or(1, |i| i + 1);
    let aic_choice = argmin(aic_per_order.iter().map(|a| a.1)).map_or(1, |i| i + 1);
    Ok(SelectionResult {
        per_order,
        aic_per_order,
        srm_choice,
        aic_choice,
        plan: choices[best],
        plan_scores,
        fits,
    })
}
