//! The `select`, `simulate` and `coverage` pipelines.

use std::path::Path;

use arbound_core::complexity::IndexCount;
use arbound_core::mixing::{
    beta_ar1, beta_arq, mixing_profile, BetaMethod, BlockChoice, GaussianArSurrogate, MixingProfile,
};
use arbound_core::riskbound::{bound_curve, srm_select, PlanScore, RiskBoundReport, SelectOptions};
use arbound_core::simgen::{coverage_experiment, simulate, CoverageConfig, CoverageResult, SimSpec};
use arbound_core::timeseries::{log_growth, summary, GrowthSeries, Summary};
use serde::Serialize;

use crate::config::{CoverageConfigArgs, Emit, RunConfig, SimulateConfig, Transform};
use crate::error::{CliError, Result};
use crate::io::{load_csv, write_csv, write_json, DEFAULT_MISSING};

pub const SCHEMA_VERSION: u32 = 1;
pub const CAP_SENSITIVITY: [f64; 3] = [0.03, 0.05, 0.1];
pub const ORDER_SENSITIVITY: [usize; 3] = [5, 10, 20];

/// Modelling choices the method leaves open, echoed so a report is self-describing.
#[derive(Debug, Clone, Serialize)]
pub struct Decisions {
    pub missing_values: &'static str,
    pub block_index_offset: &'static str,
    pub index_count: IndexCount,
    pub block_plan_rule: &'static str,
    pub eta_prime: &'static str,
    pub ar1_complexity: &'static str,
    pub aic_formula: &'static str,
    pub argmin_ties: &'static str,
    pub beta_method: &'static str,
    pub beta_monotonicity: &'static str,
    pub surrogate_fit: &'static str,
    /// Orders whose OLS estimate was outside the stationarity domain.
    pub projection_engaged: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DataSummary {
    pub source: String,
    pub raw_rows: usize,
    pub present_values: usize,
    pub n: usize,
    pub first_date: Option<String>,
    pub last_date: Option<String>,
    pub mean_removed: Option<f64>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapSensitivity {
    pub cap: f64,
    pub srm_choice: usize,
    pub bound_at_choice: f64,
    pub ar1_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderSensitivity {
    pub surrogate_order: usize,
    pub m: usize,
    pub beta: Option<f64>,
    pub eta_prime: Option<f64>,
    pub feasible: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sensitivity {
    pub cap: Vec<CapSensitivity>,
    pub surrogate_order: Vec<OrderSensitivity>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub srm_choice: usize,
    pub aic_choice: usize,
    pub per_order: Vec<RiskBoundReport>,
    pub aic_per_order: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectReport {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub decisions: Decisions,
    pub data: DataSummary,
    pub surrogate: GaussianArSurrogate,
    pub mixing: MixingProfile,
    pub plan: BlockChoice,
    pub plan_scores: Vec<PlanScore>,
    pub selection: Selection,
    pub sensitivity: Sensitivity,
}

#[derive(Serialize)]
struct BoundRow {
    p: usize,
    train_error: f64,
    complexity_term: f64,
    confidence_term: f64,
    bound_total: f64,
}

#[derive(Serialize)]
struct AicRow {
    p: usize,
    aic: f64,
    aic_minus_min: f64,
}

#[derive(Serialize)]
struct SeriesRow {
    date: String,
    value: f64,
}

fn beta_method(q: usize, config: &RunConfig, seed: u64) -> BetaMethod {
    if q == 1 {
        BetaMethod::Quadrature { points: config.quad_points }
    } else {
        BetaMethod::MonteCarlo { samples: config.beta_samples, seed }
    }
}

/// Loads, clips and transforms the input series.
pub fn prepare_series(config: &RunConfig) -> Result<(GrowthSeries, DataSummary)> {
    let raw = load_csv(&config.input, config.value_column.as_deref(), config.date_column.as_deref(), &DEFAULT_MISSING)?;
    let raw_rows = raw.len();
    let raw = raw.between(config.start, config.end);
    let series = match config.transform {
        Transform::LogGrowth => log_growth(&raw)?,
        Transform::None => {
            let (dates, values): (Vec<_>, Vec<_>) =
                raw.observations().iter().filter_map(|o| o.value.map(|v| (o.date, v))).unzip();
            GrowthSeries::from_dated(values, dates, raw.source_id())?
        }
    };
    let (series, mean_removed) = if config.center {
        let (c, mean) = series.centered();
        (c, Some(mean))
    } else {
        (series, None)
    };
    let dates = series.dates();
    let data = DataSummary {
        source: raw.source_id().to_string(),
        raw_rows,
        present_values: raw.present_count(),
        n: series.n(),
        first_date: dates.and_then(|d| d.first()).map(|d| d.to_string()),
        last_date: dates.and_then(|d| d.last()).map(|d| d.to_string()),
        mean_removed,
        summary: summary(&series)?,
    };
    Ok((series, data))
}

/// Runs the selection pipeline without writing files.
pub fn run_select(config: &RunConfig) -> Result<(SelectReport, GrowthSeries)> {
    config.validate()?;
    let (series, data) = prepare_series(config)?;
    let n = series.n();
    if n <= 2 * config.p_max {
        return Err(CliError::Config(format!("series of length {n} is too short for --p-max {}", config.p_max)));
    }
    let q = config.surrogate_order;
    let surrogate = GaussianArSurrogate::fit(&series, q, config.margin)?;
    let lags: Vec<usize> = (config.m_min..=config.m_max).filter(|&m| 2 * m <= n).collect();
    if lags.is_empty() {
        return Err(CliError::Config(format!("no block length in --m-min..--m-max fits a series of length {n}")));
    }
    let profile = mixing_profile(&surrogate, &lags, beta_method(q, config, config.seed))?;
    let options = SelectOptions { margin: config.margin, index_count: config.index_count.into() };
    let result = srm_select(&series, config.p_max, config.cap, config.eta, &profile, options)?;

    let sensitivity = Sensitivity {
        cap: cap_sensitivity(&series, config, &result.plan, options)?,
        surrogate_order: order_sensitivity(&series, config, &result.plan),
    };
    let decisions = Decisions {
        missing_values: "dropped; the series is concatenated across gaps",
        block_index_offset: "i_k = max(floor(m/2), 1) + 2mk, reading the undefined block symbol as m",
        index_count: options.index_count,
        block_plan_rule: "mu = floor(n / 2m); one (m, mu) shared by all orders, minimizing the bound averaged over p",
        eta_prime: "eta - 4(mu - 1) beta(m)",
        ar1_complexity: "p = 1 uses (4/mu) sqrt(M/2) ||X_I||; the vertex-pair form is recorded alongside",
        aic_formula: "n_eff ln(RSS / n_eff) + 2(p + 1), untruncated RSS over targets p_max+1..n",
        argmin_ties: "smallest p",
        beta_method: if q == 1 {
            "AR(1) surrogate: Gauss-Hermite quadrature of the analytic Gaussian total variation"
        } else {
            "AR(q) surrogate: Monte Carlo total variation of the state chain at lag m + q - 1"
        },
        beta_monotonicity: "running minimum over m; raw values kept",
        surrogate_fit: "stationary OLS AR(q), innovation sd from the residual variance",
        projection_engaged: result.fits.iter().filter(|f| f.projection_engaged()).map(|f| f.p).collect(),
    };
    let report = SelectReport {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        decisions,
        data,
        surrogate,
        mixing: profile,
        plan: result.plan,
        plan_scores: result.plan_scores,
        selection: Selection {
            srm_choice: result.srm_choice,
            aic_choice: result.aic_choice,
            per_order: result.per_order,
            aic_per_order: result.aic_per_order,
        },
        sensitivity,
    };
    Ok((report, series))
}

fn cap_sensitivity(
    series: &GrowthSeries,
    config: &RunConfig,
    plan: &BlockChoice,
    options: SelectOptions,
) -> Result<Vec<CapSensitivity>> {
    CAP_SENSITIVITY
        .iter()
        .map(|&cap| {
            let curve = bound_curve(series, config.p_max, cap, config.eta, plan, options)?;
            let mut best = &curve[0];
            for r in &curve[1..] {
                if r.bound_total < best.bound_total {
                    best = r;
                }
            }
            Ok(CapSensitivity { cap, srm_choice: best.p, bound_at_choice: best.bound_total, ar1_bound: curve[0].bound_total })
        })
        .collect()
}

fn order_sensitivity(series: &GrowthSeries, config: &RunConfig, plan: &BlockChoice) -> Vec<OrderSensitivity> {
    ORDER_SENSITIVITY
        .iter()
        .map(|&q| {
            let beta = GaussianArSurrogate::fit(series, q, config.margin).and_then(|s| match beta_method(q, config, config.seed) {
                BetaMethod::Quadrature { points } => beta_ar1(&s, plan.m, points),
                BetaMethod::MonteCarlo { samples, seed } => beta_arq(&s, plan.m, samples, seed).map(|e| e.mean.clamp(0.0, 1.0)),
            });
            match beta {
                Ok(b) => {
                    let eta_prime = arbound_core::mixing::adjusted_level(config.eta, plan.mu, b);
                    OrderSensitivity {
                        surrogate_order: q,
                        m: plan.m,
                        beta: Some(b),
                        eta_prime: Some(eta_prime),
                        feasible: eta_prime > 0.0,
                        error: None,
                    }
                }
                Err(e) => OrderSensitivity {
                    surrogate_order: q,
                    m: plan.m,
                    beta: None,
                    eta_prime: None,
                    feasible: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Runs the selection pipeline and writes report.json, bounds.csv, aic.csv
/// and growth.csv into the output directory.
pub fn cmd_select(config: &RunConfig) -> Result<SelectReport> {
    let (report, series) = run_select(config)?;
    write_select_outputs(&config.out_dir, &report, &series)?;
    Ok(report)
}

pub fn write_select_outputs(dir: &Path, report: &SelectReport, series: &GrowthSeries) -> Result<()> {
    let bounds: Vec<BoundRow> = report
        .selection
        .per_order
        .iter()
        .map(|r| BoundRow {
            p: r.p,
            train_error: r.train_error,
            complexity_term: r.complexity_term,
            confidence_term: r.confidence_term,
            bound_total: r.bound_total,
        })
        .collect();
    let min_aic = report.selection.aic_per_order.iter().map(|a| a.1).fold(f64::INFINITY, f64::min);
    let aic: Vec<AicRow> = report
        .selection
        .aic_per_order
        .iter()
        .map(|&(p, a)| AicRow { p, aic: a, aic_minus_min: a - min_aic })
        .collect();
    write_csv(&dir.join("bounds.csv"), &bounds)?;
    write_csv(&dir.join("aic.csv"), &aic)?;
    write_csv(&dir.join("growth.csv"), &series_rows(series))?;
    write_json(&dir.join("report.json"), report)
}

fn series_rows(series: &GrowthSeries) -> Vec<SeriesRow> {
    let dates = series.dates();
    series
        .values()
        .iter()
        .enumerate()
        .map(|(i, &value)| SeriesRow { date: dates.map(|d| d[i].to_string()).unwrap_or_default(), value })
        .collect()
}

/// Writes a synthetic series in the dialect `load_csv` reads.
pub fn cmd_simulate(config: &SimulateConfig) -> Result<()> {
    let mut spec = SimSpec::new(config.phi.clone(), config.sigma, config.n, config.seed)?;
    if let Some(b) = config.burn_in {
        spec.burn_in = b;
    }
    let series = simulate(&spec)?;
    let values = match config.emit {
        Emit::Growth => series.values().to_vec(),
        Emit::Levels => {
            if !(config.start_level > 0.0 && config.start_level.is_finite()) {
                return Err(CliError::Config("--start-level must be positive".into()));
            }
            let levels = series.cumulative_levels(config.start_level);
            if levels.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(CliError::Config(
                    "cumulative levels overflow; lower --sigma or use --emit growth".into(),
                ));
            }
            levels
        }
    };
    let rows: Vec<SeriesRow> = values
        .into_iter()
        .enumerate()
        .map(|(i, value)| {
            let date = config.start_date + chrono::Days::new(i as u64);
            SeriesRow { date: date.to_string(), value }
        })
        .collect();
    write_csv(&config.out, &rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub schema_version: u32,
    pub config: CoverageConfigArgs,
    pub result: CoverageResult,
}

pub fn cmd_coverage(args: &CoverageConfigArgs) -> Result<CoverageReport> {
    if args.m_max == 0 {
        return Err(CliError::Config("--m-max must be at least 1".into()));
    }
    let spec = SimSpec::new(args.phi.clone(), args.sigma, args.n, args.seed)?;
    let mut config = CoverageConfig::new(spec, args.p_fit, args.cap, args.eta, args.replicates, args.holdout);
    config.lags = (1..=args.m_max).collect();
    config.beta_samples = args.beta_samples;
    config.index_count = args.index_count.into();
    config.margin = args.margin;
    let report = CoverageReport { schema_version: SCHEMA_VERSION, config: args.clone(), result: coverage_experiment(&config)? };
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    Ok(report)
}
