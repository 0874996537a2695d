use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cyclomem::estimator::{estimate, Averaging, EstimateOptions, SecondStatNorm};
use cyclomem::harness::{read_records, run_experiment, summarize, write_summary, ExperimentConfig};
use cyclomem::simulate::simulate;
use cyclomem::stats::{build_schedule, Preset, ScheduleOverrides};
use cyclomem::transform::{cell_weights, discrete_transform, TransformRequest};
use cyclomem::{Error, GegenbauerSpec, MexicanHat, SampledSeries};

#[derive(Parser)]
#[command(name = "cyclomem", version, about = "Simulate cyclic long-memory series and estimate (s0, alpha)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a Gegenbauer series and write it as CSV or, for `.bin`, binary.
    Simulate(SimulateArgs),
    /// Discrete filter transform of a stored series at one (a, b).
    Transform(TransformArgs),
    /// Estimate (s0, alpha) from a stored series at level j.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment described by a config file.
    Experiment(ExperimentArgs),
    /// Summarise a records file written by `experiment`.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config; its model, series_length and master_seed are the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    n_terms: Option<usize>,
    /// Innovation standard deviation; defaults to the unit-level choice.
    #[arg(long)]
    sigma_eps: Option<f64>,
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid spacing recorded with the series.
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SeriesInput {
    /// Series file: `.bin` for the binary format, otherwise CSV.
    #[arg(long)]
    input: PathBuf,
    /// Grid spacing of a CSV series (binary files carry their own).
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    series: SeriesInput,
    /// Physical time of the first sample.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    origin: f64,
    #[arg(short, long)]
    a: f64,
    #[arg(short, long, default_value_t = 0.0, allow_hyphen_values = true)]
    b: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Also write the weight table (l, t_lo, t_hi, w) here.
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    series: SeriesInput,
    #[arg(short, long)]
    j: u32,
    #[arg(long, default_value = "desk")]
    preset: Preset,
    #[arg(long)]
    m_cap: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value = "second-moment")]
    norm: SecondStatNorm,
    /// Average over every disjoint window instead of one.
    #[arg(long)]
    blocks: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides master_seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides output_path.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Records CSV written by `experiment`.
    records: PathBuf,
    /// Write the summary table here as well as to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failure split by exit code: 1 for bad input, 2 for a failed run.
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn config_err(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

fn read_series(s: &SeriesInput) -> Result<SampledSeries, Failure> {
    let r = if s.input.extension().is_some_and(|e| e == "bin") {
        SampledSeries::read_binary(&s.input)
    } else {
        SampledSeries::read_csv(&s.input, s.dt)
    };
    // unreadable input is the user's to fix
    r.map_err(config_err)
}

fn write_series(x: &SampledSeries, path: &Path) -> Result<(), Failure> {
    if path.extension().is_some_and(|e| e == "bin") {
        x.write_binary(path)?;
    } else {
        x.write_csv(path)?;
    }
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let base = args.config.as_ref().map(ExperimentConfig::from_path).transpose().map_err(config_err)?;
    let pick = |flag: Option<f64>, from: Option<f64>, name: &str| {
        flag.or(from).ok_or_else(|| Failure::Config(format!("--{name} is required without --config")))
    };
    let model = base.as_ref().map(|c| c.model);
    let mu = pick(args.mu, model.map(|m| m.mu), "mu")?;
    let eta = pick(args.eta, model.map(|m| m.eta), "eta")?;
    let n_terms = args
        .n_terms
        .or(model.map(|m| m.n_terms))
        .ok_or_else(|| Failure::Config("--n-terms is required without --config".into()))?;
    let length = args
        .length
        .or(base.as_ref().map(|c| c.series_length))
        .ok_or_else(|| Failure::Config("--length is required without --config".into()))?;
    let seed = args.seed.or(base.as_ref().map(|c| c.master_seed)).unwrap_or(0);
    let sigma = args.sigma_eps.or(model.and_then(|m| m.sigma_eps));
    let spec = match sigma {
        Some(s) => GegenbauerSpec::new(mu, eta, s, n_terms),
        None => GegenbauerSpec::unit_level(mu, eta, n_terms, args.dt),
    }
    .map_err(config_err)?;
    let x = simulate(&spec, length, seed)?.rescale(args.dt).map_err(config_err)?;
    write_series(&x, &args.output)?;
    println!("wrote {} samples (seed {seed}, sigma_eps {}) to {}", x.len(), spec.sigma_eps, args.output.display());
    Ok(())
}

fn run_transform(args: TransformArgs) -> Result<(), Failure> {
    let x = read_series(&args.series)?.with_origin(args.origin);
    let filter = MexicanHat::new(args.sigma).map_err(config_err)?;
    let req = TransformRequest::new(args.a, args.b, args.theta, x.dt()).map_err(config_err)?;
    if let Some(p) = &args.weights {
        cell_weights(&filter, &req)?.write_csv(p)?;
    }
    let d = discrete_transform(&x, &filter, &req)?;
    println!("{d}");
    Ok(())
}

fn run_estimate(args: EstimateArgs) -> Result<(), Failure> {
    let x = read_series(&args.series)?;
    let filter = MexicanHat::new(args.sigma).map_err(config_err)?;
    let overrides = ScheduleOverrides {
        m_cap: args.m_cap,
        native_dt: Some(x.dt()),
        available_span: Some(x.span()),
        ..Default::default()
    };
    let schedule = build_schedule(args.preset, args.j + 1, &overrides)?;
    let options = EstimateOptions {
        norm: args.norm,
        averaging: if args.blocks { Averaging::Blocks } else { Averaging::SingleWindow },
    };
    let e = estimate(&x, &filter, &schedule, args.j, options)?;
    println!("s0_hat = {}", e.s0_hat);
    println!("alpha_hat = {}", e.alpha_hat);
    println!("y1 = {}", e.moments.y1);
    println!("y2 = {}", e.moments.y2);
    println!("epsilon = {}", e.epsilon);
    println!("clamps = {}", e.clamps.bits());
    Ok(())
}

fn run_experiment_cmd(args: ExperimentArgs) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::from_path(&args.config).map_err(config_err)?;
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = Some(w);
    }
    if let Some(o) = args.output {
        cfg.output_path = o;
    }
    cfg.validate().map_err(config_err)?;
    let summary = run_experiment(&cfg)?;
    print!("{}", summary.to_csv_string());
    Ok(())
}

fn run_summarize(args: SummarizeArgs) -> Result<(), Failure> {
    // a malformed records file is a bad input, not a failed run
    read_records(&args.records).map_err(config_err)?;
    let summary = summarize(&args.records).map_err(config_err)?;
    if let Some(p) = &args.output {
        write_summary(&summary, p)?;
    }
    print!("{}", summary.to_csv_string());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Transform(a) => run_transform(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Experiment(a) => run_experiment_cmd(a),
        Command::Summarize(a) => run_summarize(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
