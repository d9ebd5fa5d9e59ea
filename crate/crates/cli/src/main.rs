use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use windlab_core::mppt::{identify_params, read_samples_csv, MppLocus};
use windlab_core::scenario::{Scenario, WindProfile};
use windlab_core::sim::{compare_with_measurements, report_table, run_scenario_streaming, BenchConfig};
use windlab_core::telemetry::CsvLog;
use windlab_core::turbine::write_curve_csv;
use windlab_server::{Engine, EngineOptions, ServeOptions};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Bench(#[from] windlab_core::Error),
    #[error(transparent)]
    Server(#[from] windlab_server::Error),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
}

type Result<T> = std::result::Result<T, CliError>;

/// Wind energy conversion bench.
#[derive(Debug, Parser)]
#[command(name = "windlab", version)]
struct Cli {
    /// Bench configuration file (TOML). Built-in defaults when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run a scenario headless and print its summary as JSON.
    Run(RunArgs),
    /// Maximum-power table for the reference wind speeds, with the measured comparison.
    Table(TableArgs),
    /// Power curve P(ω) at fixed wind speed(s), as CSV.
    Curve(CurveArgs),
    /// Optimal tip-speed ratio, Cp* and the optimal load law.
    Mppt(MpptArgs),
    /// Recover rotor radius and Cp* from maximum-power samples (CSV columns v,p_star,omega_star).
    Identify(IdentifyArgs),
    /// Serve the live bench over TCP (line-delimited JSON) and optionally WebSocket.
    Serve(ServeArgs),
    /// Print the effective configuration as TOML.
    Config,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario name from the configuration.
    scenario: String,
    /// Full-rate CSV log.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Override the turbulence seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the duration (s).
    #[arg(long)]
    duration: Option<f64>,
    /// Override the time step (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Replace the wind profile with a constant speed (m/s).
    #[arg(long)]
    wind: Option<f64>,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Conversion efficiency for P_est; the configured value by default.
    #[arg(long)]
    eta: Option<f64>,
    /// Wind speeds (m/s), comma separated; the reference speeds by default.
    #[arg(long, value_delimiter = ',')]
    speeds: Option<Vec<f64>>,
    /// Emit CSV instead of the aligned table.
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// Wind speed(s) in m/s.
    #[arg(long, required = true, value_delimiter = ',')]
    wind: Vec<f64>,
    /// Upper end of the rotor-speed grid (rad/s).
    #[arg(long, default_value_t = 20.0)]
    omega_max: f64,
    /// Grid points per curve.
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Output file; stdout by default.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MpptArgs {
    /// Wind speeds (m/s) for the locus, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4,5,6,7,8,9,10,11,12")]
    speeds: Vec<f64>,
}

#[derive(Debug, Args)]
struct IdentifyArgs {
    samples: PathBuf,
    /// Air density (kg/m³).
    #[arg(long, default_value_t = 1.225)]
    rho: f64,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Line-protocol TCP address.
    #[arg(long, default_value = "127.0.0.1:7878")]
    listen: SocketAddr,
    /// WebSocket address (endpoint /ws).
    #[arg(long)]
    ws: Option<SocketAddr>,
    /// Scenario loaded at start-up.
    #[arg(long, default_value = "mpp-8")]
    scenario: String,
    /// Full-rate CSV log of the live run.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Pace against the wall clock at this many simulated seconds per second.
    #[arg(long, conflicts_with = "unpaced")]
    speed: Option<f64>,
    /// Run as fast as possible even if the configuration asks for pacing.
    #[arg(long)]
    unpaced: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::File { path: path.to_owned(), source })
}

fn load_config(path: Option<&Path>) -> Result<BenchConfig> {
    Ok(match path {
        Some(p) => BenchConfig::from_path(p)?,
        None => BenchConfig::default(),
    })
}

fn run(config: &BenchConfig, args: &RunArgs, out: &mut dyn Write) -> Result<()> {
    let mut scenario: Scenario = config.scenario(&args.scenario)?.clone();
    if let Some(v0) = args.wind {
        scenario.profile = WindProfile::Constant { v0 };
    }
    if let Some(seed) = args.seed {
        match &mut scenario.profile {
            WindProfile::Turbulent { seed: s, .. } => *s = seed,
            _ => return Err(CliError::Usage(format!("scenario {:?} has no turbulent wind to seed", args.scenario))),
        }
    }
    if let Some(d) = args.duration {
        scenario.duration = d;
    }
    if let Some(dt) = args.dt {
        scenario.dt = dt;
    }
    let summary = match &args.log {
        Some(path) => {
            let mut log = CsvLog::new(create(path)?)?;
            let summary = run_scenario_streaming(&scenario, config, |s| log.write(s))?;
            log.finish()?.flush()?;
            summary
        }
        None => run_scenario_streaming(&scenario, config, |_| Ok(()))?,
    };
    match &args.summary {
        Some(path) => writeln!(create(path)?, "{}", summary.to_json())?,
        None => writeln!(out, "{}", summary.to_json())?,
    }
    Ok(())
}

fn table(config: &BenchConfig, args: &TableArgs, out: &mut dyn Write) -> Result<()> {
    let table = report_table(config, args.speeds.as_deref(), args.eta)?;
    if args.csv {
        table.write_csv(out)?;
    } else {
        write!(out, "{table}")?;
        let comparison = compare_with_measurements(&table);
        if !comparison.rows.is_empty() {
            write!(out, "\n{comparison}")?;
        }
    }
    Ok(())
}

fn curve(config: &BenchConfig, args: &CurveArgs, out: &mut dyn Write) -> Result<()> {
    if args.points < 2 || args.omega_max.is_nan() || args.omega_max <= 0.0 {
        return Err(CliError::Usage("need at least 2 points and a positive --omega-max".into()));
    }
    let step = args.omega_max / (args.points - 1) as f64;
    // ω = 0 has no torque; the grid starts one step in.
    let grid: Vec<f64> = (1..args.points).map(|k| k as f64 * step).collect();
    let rows: Vec<_> = config.turbine.power_curves(&args.wind, &grid)?.into_iter().flatten().collect();
    match &args.out {
        Some(path) => write_curve_csv(&config.turbine, &rows, create(path)?)?,
        None => write_curve_csv(&config.turbine, &rows, out)?,
    }
    Ok(())
}

fn mppt(config: &BenchConfig, args: &MpptArgs, out: &mut dyn Write) -> Result<()> {
    let locus = MppLocus::new(&config.turbine)?;
    let opt = locus.optimum();
    writeln!(out, "lambda_star = {:.5}", opt.lambda_star)?;
    writeln!(out, "cp_star     = {:.6}", opt.cp_star)?;
    writeln!(out, "omega*/v    = {:.6} rad/m", opt.lambda_star / config.turbine.rotor_radius)?;
    writeln!(out, "load law    = T = {:.6}·ω² N·m", locus.load_coefficient())?;
    writeln!(out, "\n{:>8} {:>12} {:>10} {:>10} {:>12}", "v (m/s)", "ω* (rad/s)", "n (rpm)", "P* (W)", "T* (N·m)")?;
    for &v in &args.speeds {
        let p = locus.point(v)?;
        writeln!(out, "{:>8.2} {:>12.3} {:>10.2} {:>10.2} {:>12.3}", v, p.rotor_speed, p.rotor_rpm, p.power, p.torque)?;
    }
    Ok(())
}

fn identify(config: &BenchConfig, args: &IdentifyArgs, out: &mut dyn Write) -> Result<()> {
    let file = File::open(&args.samples).map_err(|source| CliError::File { path: args.samples.clone(), source })?;
    let samples = read_samples_csv(file)?;
    let fit = identify_params(&samples, args.rho, &config.turbine)?;
    writeln!(out, "samples      = {}", samples.len())?;
    writeln!(out, "rotor_radius = {:.5} m", fit.rotor_radius)?;
    writeln!(out, "lambda_star  = {:.5}", fit.lambda_star)?;
    writeln!(out, "cp_star      = {:.6}", fit.cp_star)?;
    let r = fit.residuals;
    writeln!(out, "residuals    = tsr {:.2e}, power {:.2e}, cp {:.2e}", r.tsr, r.power, r.cp_cross)?;
    Ok(())
}

fn serve(config: BenchConfig, args: &ServeArgs) -> Result<()> {
    let pace = match (args.speed, args.unpaced) {
        (Some(s), _) => Some(s),
        (None, true) => None,
        (None, false) => config.runtime.realtime.then_some(config.runtime.speed),
    };
    let engine = Engine::start(config, &args.scenario, EngineOptions { pace, log: args.log.clone() })?;
    let options = ServeOptions { tcp: Some(args.listen), ws: args.ws };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        eprintln!("windlab: serving {} on tcp://{}", args.scenario, args.listen);
        if let Some(ws) = args.ws {
            eprintln!("windlab: websocket at ws://{ws}/ws");
        }
        tokio::select! {
            served = windlab_server::serve(engine.handle(), options) => served,
            _ = tokio::signal::ctrl_c() => Ok(()),
        }
    })?;
    drop(engine);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Cmd::Run(args) => run(&config, args, &mut out),
        Cmd::Table(args) => table(&config, args, &mut out),
        Cmd::Curve(args) => curve(&config, args, &mut out),
        Cmd::Mppt(args) => mppt(&config, args, &mut out),
        Cmd::Identify(args) => identify(&config, args, &mut out),
        Cmd::Serve(args) => {
            drop(out);
            serve(config, args)
        }
        Cmd::Config => Ok(write!(out, "{}", config.to_toml_string()?)?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("windlab: {e}");
            ExitCode::FAILURE
        }
    }
}
