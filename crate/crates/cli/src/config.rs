//! Command-line arguments.

use std::path::PathBuf;

use arbound_core::complexity::IndexCount;
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "arbound", version, about = "Stationary AR order selection by finite-sample risk bounds")]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit AR(1..p_max), bound each risk and pick an order.
    Select(RunConfig),
    /// Write a synthetic Gaussian AR series as CSV.
    Simulate(SimulateConfig),
    /// Check how often held-out risk exceeds the bound on synthetic data.
    Coverage(CoverageConfigArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexCountArg {
    Mu,
    MuPlus1,
}

impl From<IndexCountArg> for IndexCount {
    fn from(v: IndexCountArg) -> Self {
        match v {
            IndexCountArg::Mu => IndexCount::Mu,
            IndexCountArg::MuPlus1 => IndexCount::MuPlusOne,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// Natural-log growth of the level series.
    LogGrowth,
    /// Use the present values as the sample directly.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Emit {
    Levels,
    Growth,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunConfig {
    #[arg(long)]
    pub input: PathBuf,
    /// Value column header; defaults to the first non-date column.
    #[arg(long)]
    pub value_column: Option<String>,
    /// Date column header; defaults to the first column.
    #[arg(long)]
    pub date_column: Option<String>,
    /// Drop observations dated before this day.
    #[arg(long)]
    pub start: Option<NaiveDate>,
    /// Drop observations dated after this day.
    #[arg(long)]
    pub end: Option<NaiveDate>,
    #[arg(long, value_enum, default_value_t = Transform::LogGrowth)]
    pub transform: Transform,
    #[arg(long, default_value_t = 50)]
    pub p_max: usize,
    /// Loss cap M.
    #[arg(long, default_value_t = 0.05)]
    pub cap: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    #[arg(long, default_value_t = 20)]
    pub surrogate_order: usize,
    #[arg(long, default_value_t = 1)]
    pub m_min: usize,
    #[arg(long, default_value_t = 50)]
    pub m_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Not echoed in the report, so reruns elsewhere stay byte-identical.
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Subtract the sample mean before fitting.
    #[arg(long)]
    pub center: bool,
    #[arg(long, value_enum, default_value_t = IndexCountArg::Mu)]
    pub index_count: IndexCountArg,
    /// Stationarity margin for the coefficient projection.
    #[arg(long, default_value_t = 1e-3)]
    pub margin: f64,
    /// Monte Carlo draws per lag for β(m) when the surrogate order exceeds 1.
    #[arg(long, default_value_t = 100_000)]
    pub beta_samples: usize,
    /// Gauss-Hermite nodes for β(m) of an AR(1) surrogate.
    #[arg(long, default_value_t = 200)]
    pub quad_points: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(CliError::Config(msg.to_string()));
        if self.p_max == 0 {
            return fail("--p-max must be at least 1");
        }
        if !(self.cap > 0.0 && self.cap.is_finite()) {
            return fail("--cap must be positive");
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return fail("--eta must lie in (0, 1)");
        }
        if self.surrogate_order == 0 {
            return fail("--surrogate-order must be at least 1");
        }
        if self.m_min == 0 || self.m_min > self.m_max {
            return fail("need 1 <= --m-min <= --m-max");
        }
        if !(0.0..1.0).contains(&self.margin) {
            return fail("--margin must lie in [0, 1)");
        }
        if self.beta_samples == 0 || self.quad_points == 0 {
            return fail("--beta-samples and --quad-points must be positive");
        }
        if let (Some(s), Some(e)) = (self.start, self.end) {
            if s > e {
                return fail("--start is after --end");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateConfig {
    /// AR coefficients, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub phi: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Discarded warm-up draws; defaults to 100 per lag.
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Write cumulative-exponential levels (n + 1 rows) or the series itself.
    #[arg(long, value_enum, default_value_t = Emit::Levels)]
    pub emit: Emit,
    #[arg(long, default_value_t = 100.0)]
    pub start_level: f64,
    #[arg(long, default_value = "2000-01-01")]
    pub start_date: NaiveDate,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoverageConfigArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.5,-0.3")]
    pub phi: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Training length.
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
    #[arg(long, default_value_t = 512)]
    pub holdout: usize,
    #[arg(long, default_value_t = 2)]
    pub p_fit: usize,
    #[arg(long, default_value_t = 10.0)]
    pub cap: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub m_max: usize,
    #[arg(long, default_value_t = 20_000)]
    pub beta_samples: usize,
    #[arg(long, value_enum, default_value_t = IndexCountArg::Mu)]
    pub index_count: IndexCountArg,
    #[arg(long, default_value_t = 1e-3)]
    pub margin: f64,
    /// Also write the JSON result to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
