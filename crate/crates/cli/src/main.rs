//! `spinfolio`: frontier analyses, rolling indicator scans and self-checks
//! from a wide CSV of asset prices.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use spinfolio::report::{
    frontier_rows, frontier_summary, scan_table, write_curves_csv, write_frontier_csv,
    write_price_csv, write_scan_csv,
};
use spinfolio::selftest::{self, SelfTestConfig};
use spinfolio::synthetic::{default_start, regime_drift, FactorMarket};
use spinfolio::{
    compute_returns, estimate_moment, parse_price_table, resample_monthly, rolling_scan_with,
    slice_window, sweep_frontier_with, CarmConfig, LambdaGrid64, PricePanel64, ReturnPanel64,
    SolverConfig, Strategy,
};

#[derive(Parser)]
#[command(
    name = "spinfolio",
    version,
    about = "Ground-state portfolio indicators from price data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Magnetization curve of the window ending at the latest month.
    Frontier(FrontierArgs),
    /// Rolling indicators (M, E, E') with CARM columns for every window.
    Scan(ScanArgs),
    /// Check the solver against its oracles on generated instances.
    Selftest(SelftestArgs),
    /// Write a synthetic monthly price table.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Common {
    /// Wide price CSV: `date,<asset>,...` with ISO dates.
    #[arg(long)]
    input: PathBuf,
    /// Window length in monthly return rows.
    #[arg(long, default_value_t = 12)]
    window: usize,
    /// Number of evenly spaced λ values in [0, 1].
    #[arg(long, default_value_t = 101)]
    lambda_points: usize,
    /// Seed for the random restarts of the local search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random sign patterns tried per λ in addition to the fixed seeds.
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// KKT tolerance of the per-orthant solver.
    #[arg(long, default_value_t = 1e-9)]
    kkt_tolerance: f64,
    /// Enumerate all 2^N orthants instead of the local search.
    #[arg(long)]
    exact: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FrontierArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    /// CARM horizon N in months.
    #[arg(long, default_value_t = 12)]
    carm_n: usize,
    /// Also write the date × λ grid of m to this CSV file.
    #[arg(long)]
    curves: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random instances per check.
    #[arg(long, default_value_t = 24)]
    instances: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-9)]
    kkt_tolerance: f64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 6)]
    assets: usize,
    /// Monthly returns to generate; the table has one more price row.
    #[arg(long, default_value_t = 120)]
    months: usize,
    /// Leading months with drift `+drift`; the rest get `−drift`.
    /// Defaults to all months.
    #[arg(long)]
    bull: Option<usize>,
    #[arg(long, default_value_t = 0.02)]
    drift: f64,
    #[arg(long, default_value_t = 0.03)]
    factor_vol: f64,
    #[arg(long, default_value_t = 0.04)]
    idiosyncratic_vol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

/// Everything that determines a run's output, echoed into JSON documents.
#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    input_path: String,
    window_months: usize,
    lambda_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    carm_horizon: Option<usize>,
    seed: u64,
    restarts: usize,
    kkt_tolerance: f64,
    strategy: Strategy,
    output_format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    curves_path: Option<String>,
}

impl RunManifest {
    fn new(command: &'static str, c: &Common) -> Result<Self> {
        if c.window < 2 {
            bail!("--window must be at least 2, got {}", c.window);
        }
        if c.lambda_points < 2 {
            bail!(
                "--lambda-points must be at least 2, got {}",
                c.lambda_points
            );
        }
        Ok(Self {
            command,
            input_path: c.input.display().to_string(),
            window_months: c.window,
            lambda_points: c.lambda_points,
            carm_horizon: None,
            seed: c.seed,
            restarts: c.restarts,
            kkt_tolerance: c.kkt_tolerance,
            strategy: if c.exact {
                Strategy::Exhaustive
            } else {
                Strategy::LocalSearch
            },
            output_format: c.format,
            output_path: c.output.as_ref().map(|p| p.display().to_string()),
            curves_path: None,
        })
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            random_restarts: self.restarts,
            rng_seed: self.seed,
            kkt_tolerance: self.kkt_tolerance,
            ..SolverConfig::default()
        }
    }

    fn grid(&self) -> Result<LambdaGrid64> {
        Ok(LambdaGrid64::uniform(self.lambda_points)?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Frontier(args) => frontier(&args),
        Command::Scan(args) => scan(&args),
        Command::Selftest(args) => run_selftest(&args),
        Command::Synth(args) => synth(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_returns(path: &Path) -> Result<ReturnPanel64> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let prices: PricePanel64 = parse_price_table(io::BufReader::new(file))
        .with_context(|| format!("cannot read prices from {}", path.display()))?;
    let monthly = resample_monthly(&prices)?;
    Ok(compute_returns(&monthly)?)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(out: &mut dyn Write, doc: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, doc)?;
    writeln!(out)?;
    Ok(())
}

fn frontier(args: &FrontierArgs) -> Result<ExitCode> {
    let manifest = RunManifest::new("frontier", &args.common)?;
    let returns = load_returns(&args.common.input)?;
    let last = returns.rows() - 1;
    let window = slice_window(&returns, last, manifest.window_months)?;
    let moment = estimate_moment(&window)?;
    let curve = sweep_frontier_with(
        &moment,
        &manifest.grid()?,
        &manifest.solver(),
        manifest.strategy,
    )?;
    let rows = frontier_rows(&curve);
    let summary = frontier_summary(&curve, returns.dates()[last]);

    let mut out = open_output(args.common.output.as_deref())?;
    match manifest.output_format {
        Format::Csv => write_frontier_csv(&mut out, &summary, &rows)?,
        Format::Json => write_json(
            &mut out,
            &json!({ "manifest": manifest, "series": rows, "summary": summary }),
        )?,
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn scan(args: &ScanArgs) -> Result<ExitCode> {
    let mut manifest = RunManifest::new("scan", &args.common)?;
    if args.carm_n == 0 {
        bail!("--carm-n must be at least 1");
    }
    manifest.carm_horizon = Some(args.carm_n);
    manifest.curves_path = args.curves.as_ref().map(|p| p.display().to_string());

    let returns = load_returns(&args.common.input)?;
    let grid = manifest.grid()?;
    let series = rolling_scan_with(
        &returns,
        manifest.window_months,
        &grid,
        &manifest.solver(),
        manifest.strategy,
    )?;
    let carm_cfg = CarmConfig {
        horizon_n: args.carm_n,
        normalize_by_median: true,
    };
    let table = scan_table(&series, &carm_cfg);
    if table.carm_max_median.is_none() {
        eprintln!(
            "warning: CARM of E' has no positive entry; carm_E_prime_normalized is unnormalized"
        );
    }

    if let Some(path) = &args.curves {
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = BufWriter::new(file);
        write_curves_csv(&mut w, &grid, &series)?;
        w.flush()?;
    }

    let mut out = open_output(args.common.output.as_deref())?;
    match manifest.output_format {
        Format::Csv => write_scan_csv(&mut out, &table)?,
        Format::Json => {
            let curves: Vec<_> = series
                .points()
                .iter()
                .map(|p| json!({ "date": p.date, "m": p.magnetization_curve }))
                .collect();
            write_json(
                &mut out,
                &json!({
                    "manifest": manifest,
                    "series": table.rows,
                    "carm_E_prime_median": table.carm_max_median,
                    "lambda": grid.values(),
                    "curves": curves,
                }),
            )?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn run_selftest(args: &SelftestArgs) -> Result<ExitCode> {
    let cfg = SelfTestConfig {
        solver: SolverConfig {
            random_restarts: args.restarts,
            rng_seed: args.seed,
            kkt_tolerance: args.kkt_tolerance,
            ..SolverConfig::default()
        },
        seed: args.seed,
        instances: args.instances,
    };
    let report = selftest::run(&cfg)?;
    print!("{report}");
    let failed = report.failures().count();
    if failed == 0 {
        println!("all {} properties hold", report.checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{failed} of {} properties violated", report.checks.len());
        Ok(ExitCode::FAILURE)
    }
}

fn synth(args: &SynthArgs) -> Result<ExitCode> {
    if args.assets < 2 || args.months < 1 {
        bail!("synth needs at least 2 assets and 1 month");
    }
    let bull = args.bull.unwrap_or(args.months).min(args.months);
    let market = FactorMarket {
        assets: args.assets,
        factor_vol: args.factor_vol,
        idiosyncratic_vol: args.idiosyncratic_vol,
        seed: args.seed,
    };
    let drift = regime_drift(bull, args.months - bull, args.drift);
    let panel: PricePanel64 = market.price_panel(default_start(), &drift)?;
    let mut out = open_output(args.output.as_deref())?;
    write_price_csv(&mut out, &panel)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}
