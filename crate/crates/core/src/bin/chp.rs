use anyhow::{Context, Result};
use chp_market::experiment::{
    self, paper_demand_model, paper_initial_price, parse_step_rule, ExperimentConfig, FleetSource,
    PriceRule, ProfileSource,
};
use chp_market::fleet::BuiltinFleet;
use chp_market::market::{self, DayProfile};
use chp_market::pricing::Method;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "chp", about = "Convex hull pricing experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price and settle a 24-hour day.
    Run(RunArgs),
    /// Cost-curve table (curves.csv).
    Curves(CurveArgs),
    /// Fixed-demand uplift curve (uplift_curve.csv).
    UpliftCurve(UpliftArgs),
    /// Write a synthetic hour,d1 profile.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct FleetArgs {
    /// `gribik`, `scarf`, or a path to a fleet JSON document.
    #[arg(long)]
    fleet: FleetSource,
    /// Parameter preset for a fleet loaded from a file.
    #[arg(long, default_value = "gribik")]
    preset: BuiltinFleet,
}

impl FleetArgs {
    fn preset(&self) -> BuiltinFleet {
        match self.fleet {
            FleetSource::Builtin(b) => b,
            FleetSource::File(_) => self.preset,
        }
    }
}

#[derive(Args)]
struct DemandArgs {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    utility_constant: Option<f64>,
    /// hour,d1 table with 24 rows.
    #[arg(long, conflicts_with = "synthetic")]
    profile: Option<PathBuf>,
    /// MIN,MEAN,MAX of a synthetic diurnal profile.
    #[arg(long, value_parser = ProfileSource::parse_synthetic)]
    synthetic: Option<ProfileSource>,
}

impl DemandArgs {
    fn model(&self, preset: BuiltinFleet) -> Result<market::DemandModel> {
        let base = paper_demand_model(preset);
        let model = market::DemandModel {
            a: self.a.unwrap_or(base.a),
            mu1: self.mu1.unwrap_or(base.mu1),
            mu2: self.mu2.unwrap_or(base.mu2),
            nu: self.nu.unwrap_or(base.nu),
            utility_constant: self.utility_constant.unwrap_or(base.utility_constant),
        };
        model.validate()?;
        Ok(model)
    }

    fn profile_source(&self) -> ProfileSource {
        match (&self.profile, &self.synthetic) {
            (Some(path), _) => ProfileSource::File(path.clone()),
            (None, Some(s)) => s.clone(),
            (None, None) => ProfileSource::default(),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    fleet: FleetArgs,
    #[arg(long)]
    method: Method,
    #[command(flatten)]
    demand: DemandArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// `paper` or `c/k:VALUE`.
    #[arg(long, default_value = "paper")]
    step: String,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Set every hourly noise term to zero.
    #[arg(long)]
    no_noise: bool,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    fleet: FleetArgs,
    #[command(flatten)]
    demand: DemandArgs,
    #[arg(long)]
    step_mw: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct UpliftArgs {
    #[command(flatten)]
    fleet: FleetArgs,
    #[arg(long)]
    rule: PriceRule,
    #[arg(long)]
    step_mw: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, value_parser = ProfileSource::parse_synthetic)]
    synthetic: Option<ProfileSource>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let preset = args.fleet.preset();
            let config = ExperimentConfig {
                fleet: args.fleet.fleet.clone(),
                model: args.demand.model(preset)?,
                profile: args.demand.profile_source(),
                method: args.method,
                initial_price: args.lambda0.unwrap_or_else(|| paper_initial_price(preset)),
                iterations: args.iters,
                step_rule: parse_step_rule(&args.step, preset).map_err(anyhow::Error::msg)?,
                seed: args.seed,
                noise: !args.no_noise,
                jobs: args.jobs,
                out_dir: args.out,
            };
            let run = experiment::run_experiment(&config)?;
            print!(
                "{}",
                experiment::describe_summary(config.method, &run.summary)
            );
        }
        Command::Curves(args) => {
            let fleet = args.fleet.fleet.load()?;
            let model = args.demand.model(args.fleet.preset())?;
            let profile = args.demand.profile_source().load()?;
            let rows =
                experiment::emit_cost_curves(&fleet, &model, &profile, args.step_mw, &args.out)?;
            println!(
                "wrote {} rows to {}",
                rows.len(),
                args.out.join("curves.csv").display()
            );
        }
        Command::UpliftCurve(args) => {
            let fleet = args.fleet.fleet.load()?;
            let rows = experiment::emit_uplift_curves(&fleet, args.rule, args.step_mw, &args.out)?;
            println!(
                "wrote {} rows to {}",
                rows.len(),
                args.out.join("uplift_curve.csv").display()
            );
        }
        Command::Profile(args) => {
            let profile: DayProfile = args.synthetic.unwrap_or_default().load()?;
            let file = std::fs::File::create(&args.out)
                .with_context(|| format!("creating {}", args.out.display()))?;
            market::write_profile(&profile, file)?;
        }
    }
    Ok(())
}
