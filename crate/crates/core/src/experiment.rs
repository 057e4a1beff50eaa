//! The 24-hour day-ahead experiment and the figure data generators.
//!
//! [`run_experiment`] prices every hour with the configured method, settles
//! it, and writes `hours.csv`, `trace.csv`, and `summary.csv`. Hours run in
//! parallel; iterations within an hour are sequential. Everything except the
//! `elapsed_secs` column of `trace.csv` is a deterministic function of the
//! configuration and seed.

use crate::fleet::{builtin_fleet, load_fleet, BuiltinFleet, Fleet, FleetError};
use crate::hull::{self, HullError};
use crate::market::{self, DayProfile, DemandModel, MarketError, HOURS};
use crate::pricing::{self, HourMarket, Method, PricingError, PricingTrace, StepRule};
use crate::ucp::{self, QuadraticCost, UcpError};
use crate::welfare::{self, DaySummary, HourResult, WelfareError};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Grid size for the quadratic baseline fit.
pub const QUADRATIC_FIT_SAMPLES: usize = 121;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Fleet(#[from] FleetError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Ucp(#[from] UcpError),
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error(transparent)]
    Welfare(#[from] WelfareError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Where the fleet comes from: a built-in fixture or a JSON document.
#[derive(Debug, Clone, PartialEq)]
pub enum FleetSource {
    Builtin(BuiltinFleet),
    File(PathBuf),
}

impl FleetSource {
    pub fn load(&self) -> Result<Fleet, ExperimentError> {
        match self {
            FleetSource::Builtin(which) => Ok(builtin_fleet(*which)),
            FleetSource::File(path) => {
                let doc = std::fs::read_to_string(path).map_err(io_err(path))?;
                Ok(load_fleet(&doc)?)
            }
        }
    }
}

impl std::str::FromStr for FleetSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<BuiltinFleet>() {
            Ok(which) => FleetSource::Builtin(which),
            Err(_) => FleetSource::File(PathBuf::from(s)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSource {
    File(PathBuf),
    Synthetic { min: f64, mean: f64, max: f64 },
}

impl Default for ProfileSource {
    fn default() -> Self {
        ProfileSource::Synthetic {
            min: market::BASE_DEMAND_MIN,
            mean: market::BASE_DEMAND_MEAN,
            max: market::BASE_DEMAND_MAX,
        }
    }
}

impl ProfileSource {
    pub fn load(&self) -> Result<DayProfile, ExperimentError> {
        match self {
            ProfileSource::File(path) => {
                let file = std::fs::File::open(path).map_err(io_err(path))?;
                Ok(market::load_profile(file)?)
            }
            ProfileSource::Synthetic { min, mean, max } => Ok(DayProfile::new(
                market::synthetic_profile(*min, *mean, *max)?,
            )?),
        }
    }

    /// Parses `MIN,MEAN,MAX`.
    pub fn parse_synthetic(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [min, mean, max] => Ok(ProfileSource::Synthetic { min, mean, max }),
            _ => Err(format!("expected MIN,MEAN,MAX, got `{s}`")),
        }
    }
}

/// `paper` picks the fixture's own step rule; `c/k:VALUE` sets `γ_k = VALUE / k`.
pub fn parse_step_rule(s: &str, preset: BuiltinFleet) -> Result<StepRule, String> {
    if s == "paper" {
        return Ok(paper_step_rule(preset));
    }
    let value = s
        .strip_prefix("c/k:")
        .ok_or_else(|| format!("expected `paper` or `c/k:VALUE`, got `{s}`"))?;
    let c: f64 = value.parse().map_err(|e| format!("`{value}`: {e}"))?;
    if !(c.is_finite() && c >= 0.0) {
        return Err(format!(
            "step constant must be finite and nonnegative, got {c}"
        ));
    }
    Ok(StepRule::Harmonic(c))
}

/// `γ_k = 1/(10k)` for the Gribik fleet, `1/(100k)` for Scarf.
pub fn paper_step_rule(preset: BuiltinFleet) -> StepRule {
    match preset {
        BuiltinFleet::Gribik => StepRule::Harmonic(0.1),
        BuiltinFleet::Scarf => StepRule::Harmonic(0.01),
    }
}

pub fn paper_demand_model(preset: BuiltinFleet) -> DemandModel {
    match preset {
        BuiltinFleet::Gribik => DemandModel::gribik(),
        BuiltinFleet::Scarf => DemandModel::scarf(),
    }
}

pub fn paper_initial_price(preset: BuiltinFleet) -> f64 {
    match preset {
        BuiltinFleet::Gribik => 100.0,
        BuiltinFleet::Scarf => 10.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub fleet: FleetSource,
    pub model: DemandModel,
    pub profile: ProfileSource,
    pub method: Method,
    pub initial_price: f64,
    pub iterations: usize,
    pub step_rule: StepRule,
    pub seed: u64,
    /// When false, every `δ_t` is zero.
    pub noise: bool,
    pub jobs: usize,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Defaults of the published experiment for a built-in fleet.
    pub fn paper_defaults(preset: BuiltinFleet, method: Method) -> Self {
        Self {
            fleet: FleetSource::Builtin(preset),
            model: paper_demand_model(preset),
            profile: ProfileSource::default(),
            method,
            initial_price: paper_initial_price(preset),
            iterations: 100,
            step_rule: paper_step_rule(preset),
            seed: 0,
            noise: true,
            jobs: 1,
            out_dir: PathBuf::from("out"),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.model.validate()?;
        if !(self.initial_price >= pricing::PRICE_FLOOR && self.initial_price.is_finite()) {
            return Err(ExperimentError::Config(format!(
                "initial price {} must be at least {}",
                self.initial_price,
                pricing::PRICE_FLOOR
            )));
        }
        if self.iterations == 0 {
            return Err(ExperimentError::Config(
                "iterations must be at least 1".into(),
            ));
        }
        if self.jobs == 0 {
            return Err(ExperimentError::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything computed for one day, before it is written out.
#[derive(Debug, Clone)]
pub struct DayRun {
    pub profile: DayProfile,
    pub hours: Vec<HourResult>,
    /// `None` for hours the method could not price.
    pub traces: Vec<Option<PricingTrace>>,
    pub summary: DaySummary,
    pub quadratic: Option<QuadraticCost>,
}

/// Prices one hour with `method`.
pub fn price_hour(
    hour: &HourMarket<'_>,
    method: Method,
    initial_price: f64,
    iterations: usize,
    rule: StepRule,
    quad: Option<&QuadraticCost>,
) -> Result<PricingTrace, PricingError> {
    match method {
        Method::ChpSubgradient => hour.run_subgradient(initial_price, iterations, rule),
        Method::ChpExact => hour.point_trace(Method::ChpExact, hour.exact_dual()?),
        Method::Dispatchable => {
            hour.point_trace(Method::Dispatchable, hour.dispatchable_equilibrium()?)
        }
        Method::Lmp => {
            let quad = quad.expect("quadratic fit is computed for lmp runs");
            hour.run_lmp(quad, initial_price, iterations, rule)
        }
    }
}

/// Runs the day in memory.
pub fn simulate_day(config: &ExperimentConfig) -> Result<DayRun, ExperimentError> {
    config.validate()?;
    let fleet = config.fleet.load()?;
    let mut profile = config.profile.load()?;
    if config.noise {
        profile = profile.with_noise(market::sample_noise(config.seed));
    }
    let quadratic = match config.method {
        Method::Lmp => Some(ucp::quadratic_fit(&fleet, QUADRATIC_FIT_SAMPLES)?),
        _ => None,
    };

    let run_hour = |t: usize| -> Result<(HourResult, Option<PricingTrace>), ExperimentError> {
        let hour = HourMarket::new(&fleet, &config.model, &profile, t)?;
        match price_hour(
            &hour,
            config.method,
            config.initial_price,
            config.iterations,
            config.step_rule,
            quadratic.as_ref(),
        ) {
            Ok(trace) => {
                let settled =
                    welfare::settle_hour(&fleet, &config.model, &profile, t, trace.final_price)?;
                Ok((settled, Some(trace)))
            }
            Err(PricingError::NoCrossing { .. }) => Ok((HourResult::unpriced(t), None)),
            Err(e) => Err(e.into()),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()?;
    let per_hour: Vec<_> = pool.install(|| {
        (0..HOURS)
            .into_par_iter()
            .map(run_hour)
            .collect::<Result<Vec<_>, _>>()
    })?;
    let (hours, traces): (Vec<_>, Vec<_>) = per_hour.into_iter().unzip();
    let summary = welfare::summarize_day(&hours)?;
    Ok(DayRun {
        profile,
        hours,
        traces,
        summary,
        quadratic,
    })
}

/// Runs the day and writes `hours.csv`, `trace.csv`, `summary.csv` into the
/// configured output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<DayRun, ExperimentError> {
    let run = simulate_day(config)?;
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(&dir.join("hours.csv"), &hours_csv(&run.hours))?;
    write_file(&dir.join("trace.csv"), &trace_csv(&run.traces))?;
    write_file(&dir.join("summary.csv"), &summary_csv(&run.hours))?;
    Ok(run)
}

fn write_file(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    std::fs::write(path, contents).map_err(io_err(path))
}

/// Shortest round-trip decimal; NaN and infinities become empty cells.
fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, cell)
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub const HOURS_HEADER: [&str; 10] = [
    "t",
    "price",
    "demand",
    "cost",
    "uplift",
    "utility_gross",
    "utility_net",
    "profit",
    "welfare",
    "status",
];

pub fn hours_csv(hours: &[HourResult]) -> String {
    table(
        &HOURS_HEADER,
        hours.iter().map(|h| {
            vec![
                h.t.to_string(),
                cell(h.price),
                cell(h.demand),
                cell(h.supply_cost),
                cell(h.uplift),
                cell(h.consumer_utility_gross),
                cell(h.consumer_utility_net),
                cell(h.supplier_profit),
                cell(h.social_welfare),
                h.status.as_str().to_string(),
            ]
        }),
    )
}

pub fn trace_csv(traces: &[Option<PricingTrace>]) -> String {
    let header = [
        "t",
        "method",
        "k",
        "price",
        "demand",
        "supply",
        "step",
        "dual_value",
        "uplift",
        "elapsed_secs",
    ];
    let rows = traces.iter().enumerate().flat_map(|(t, trace)| {
        trace.iter().flat_map(move |tr| {
            tr.records.iter().map(move |r| {
                vec![
                    t.to_string(),
                    tr.method.to_string(),
                    r.k.to_string(),
                    cell(r.price),
                    cell(r.demand),
                    cell(r.supply),
                    cell(r.step),
                    cell(r.dual_value),
                    opt_cell(r.uplift),
                    format!("{:.9}", r.elapsed_secs),
                ]
            })
        })
    });
    table(&header, rows)
}

/// Per-metric min/mean/max/total over the day. Price statistics use priced
/// hours; all other metrics use feasible hours.
pub fn summary_csv(hours: &[HourResult]) -> String {
    type Metric = (&'static str, fn(&HourResult) -> f64);
    let metrics: [Metric; 8] = [
        ("price", |h| h.price),
        ("demand", |h| h.demand),
        ("cost", |h| h.supply_cost),
        ("uplift", |h| h.uplift),
        ("utility_gross", |h| h.consumer_utility_gross),
        ("utility_net", |h| h.consumer_utility_net),
        ("profit", |h| h.supplier_profit),
        ("welfare", |h| h.social_welfare),
    ];
    let mut rows: Vec<Vec<String>> = metrics
        .iter()
        .map(|(name, get)| {
            let values: Vec<f64> = hours
                .iter()
                .filter(|h| *name == "price" || h.is_feasible())
                .map(get)
                .filter(|v| v.is_finite())
                .collect();
            let n = values.len() as f64;
            let total: f64 = values.iter().sum();
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            vec![
                name.to_string(),
                cell(min),
                cell(total / n),
                cell(max),
                cell(total),
            ]
        })
        .collect();
    let unsettled = hours.iter().filter(|h| !h.is_feasible()).count();
    rows.push(vec![
        "unsettled_hours".into(),
        String::new(),
        String::new(),
        String::new(),
        unsettled.to_string(),
    ]);
    table(&["metric", "min", "mean", "max", "total"], rows)
}

/// One row of the cost-curve table. `None` marks an undefined cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostCurveRow {
    pub y: f64,
    pub v: f64,
    pub v_relaxed: f64,
    pub v_no_startup: Option<f64>,
    pub v_quadratic: f64,
    pub v_hull: f64,
    pub utility: Option<f64>,
}

fn demand_grid(capacity: f64, step: f64) -> Result<Vec<f64>, ExperimentError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(ExperimentError::Config(format!(
            "grid step must be positive, got {step}"
        )));
    }
    let n = (capacity / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    if capacity - grid[n] > 1e-9 * capacity.max(1.0) {
        grid.push(capacity);
    }
    Ok(grid)
}

/// Cost curves over `[0, capacity]`: commitment cost, relaxed cost, the
/// startup-free cost and its quadratic fit, the convex hull, and the first
/// hour's utility.
pub fn cost_curves(
    fleet: &Fleet,
    model: &DemandModel,
    profile: &DayProfile,
    grid_step: f64,
) -> Result<Vec<CostCurveRow>, ExperimentError> {
    let quad = ucp::quadratic_fit(fleet, QUADRATIC_FIT_SAMPLES)?;
    let ceiling = hull::default_price_ceiling(fleet);
    let grid = demand_grid(fleet.total_capacity(), grid_step)?;
    grid.into_par_iter()
        .map(|y| {
            Ok(CostCurveRow {
                y,
                v: ucp::ucp_value(fleet, y)?.total_cost,
                v_relaxed: ucp::relaxed_value(fleet, y)?.value,
                v_no_startup: ucp::no_startup_value(fleet, y).ok(),
                v_quadratic: quad.value(y),
                v_hull: hull::hull_value(fleet, y, ceiling)?.hull_value,
                utility: market::hourly_utility(model, profile, 0, y).ok(),
            })
        })
        .collect()
}

pub fn cost_curves_csv(rows: &[CostCurveRow]) -> String {
    table(
        &[
            "y",
            "v",
            "v_relaxed",
            "v_no_startup",
            "v_quadratic",
            "v_hull",
            "U_1",
        ],
        rows.iter().map(|r| {
            vec![
                cell(r.y),
                cell(r.v),
                cell(r.v_relaxed),
                opt_cell(r.v_no_startup),
                cell(r.v_quadratic),
                cell(r.v_hull),
                opt_cell(r.utility),
            ]
        }),
    )
}

/// Writes `curves.csv` into `out_dir`.
pub fn emit_cost_curves(
    fleet: &Fleet,
    model: &DemandModel,
    profile: &DayProfile,
    grid_step: f64,
    out_dir: &Path,
) -> Result<Vec<CostCurveRow>, ExperimentError> {
    let rows = cost_curves(fleet, model, profile, grid_step)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_file(&out_dir.join("curves.csv"), &cost_curves_csv(&rows))?;
    Ok(rows)
}

/// Price rule for the fixed-demand uplift curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceRule {
    Chp,
    Dispatchable,
}

impl std::str::FromStr for PriceRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chp" => Ok(PriceRule::Chp),
            "dispatchable" => Ok(PriceRule::Dispatchable),
            other => Err(format!("unknown price rule `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpliftCurveRow {
    pub y: f64,
    pub price: f64,
    pub uplift: f64,
}

/// Uplift at each fixed demand when priced by `rule`. The convex hull rule
/// gives the pointwise minimum over all prices.
pub fn uplift_curve(
    fleet: &Fleet,
    rule: PriceRule,
    grid_step: f64,
) -> Result<Vec<UpliftCurveRow>, ExperimentError> {
    let grid = demand_grid(fleet.total_capacity(), grid_step)?;
    grid.into_par_iter()
        .map(|y| {
            let price = match rule {
                PriceRule::Chp => hull::chp_fixed_demand(fleet, y)?,
                PriceRule::Dispatchable => pricing::dispatchable_price(fleet, y)?,
            };
            Ok(UpliftCurveRow {
                y,
                price,
                uplift: hull::uplift(fleet, price, y)?,
            })
        })
        .collect()
}

pub fn uplift_curve_csv(rows: &[UpliftCurveRow]) -> String {
    table(
        &["y", "price", "uplift"],
        rows.iter()
            .map(|r| vec![cell(r.y), cell(r.price), cell(r.uplift)]),
    )
}

/// Writes `uplift_curve.csv` into `out_dir`.
pub fn emit_uplift_curves(
    fleet: &Fleet,
    rule: PriceRule,
    grid_step: f64,
    out_dir: &Path,
) -> Result<Vec<UpliftCurveRow>, ExperimentError> {
    let rows = uplift_curve(fleet, rule, grid_step)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_file(&out_dir.join("uplift_curve.csv"), &uplift_curve_csv(&rows))?;
    Ok(rows)
}

/// Human-readable one-screen summary of a day.
pub fn describe_summary(method: Method, s: &DaySummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "method            {method}");
    let _ = writeln!(
        out,
        "price min/mean/max {:.4} / {:.4} / {:.4}",
        s.price_min, s.price_mean, s.price_max
    );
    let _ = writeln!(out, "total demand      {:.3}", s.total_demand);
    let _ = writeln!(out, "total uplift      {:.3}", s.total_uplift);
    let _ = writeln!(out, "supplier profit   {:.3}", s.total_profit);
    let _ = writeln!(out, "utility (gross)   {:.3}", s.total_utility_gross);
    let _ = writeln!(out, "utility (net)     {:.3}", s.total_utility_net);
    let _ = writeln!(out, "social welfare    {:.3}", s.total_welfare);
    if s.infeasible_hours > 0 {
        let _ = writeln!(out, "unsettled hours   {}", s.infeasible_hours);
    }
    out
}
