use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use extravisc_core::{
    config_from_json, generate_instance, instance_from_json, instance_to_json, run_bench, run_on_instance,
    validate_instance, Algorithm, AlphaSchedule, BenchOptions, ExperimentError, GeneratorSpec, ModelError,
    SolverConfig, SolverError,
};

/// Parallel extragradient–viscosity solvers: instance generation, single
/// runs and the seeded benchmark.
#[derive(Debug, Parser)]
#[command(name = "extravisc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random instance as JSON.
    Generate(GenerateArgs),
    /// Run one or more algorithms on an instance file.
    Solve(SolveArgs),
    /// Run every algorithm under both step schedules for a range of seeds.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct Sizes {
    /// Space dimension.
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Number of rows of A.
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    n_bifunctions: usize,
    #[arg(long, default_value_t = 20)]
    m_maps: usize,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    sizes: Sizes,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Schedule {
    InvN,
    InvSqrtN,
}

impl From<Schedule> for AlphaSchedule {
    fn from(s: Schedule) -> Self {
        match s {
            Schedule::InvN => AlphaSchedule::InvN,
            Schedule::InvSqrtN => AlphaSchedule::InvSqrtN,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// alg1, alg2 or phem; comma-separated for several.
    #[arg(long, value_delimiter = ',', default_value = "alg1")]
    algorithm: Vec<Algorithm>,
    /// Solver configuration JSON; defaults to the standard parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured step schedule.
    #[arg(long, value_enum)]
    alpha: Option<Schedule>,
    /// Overrides the configured iteration budget.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Use the standard sizes (m = 10, k = 20, N = 5, M = 20).
    #[arg(long, conflicts_with_all = ["m", "k", "n_bifunctions", "m_maps"])]
    paper_defaults: bool,
    #[command(flatten)]
    sizes: Sizes,
    /// Inclusive range `a..b` or a comma-separated list.
    #[arg(long, default_value = "1..10", value_parser = parse_seeds)]
    seeds: SeedList,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone)]
struct SeedList(Vec<u64>);

fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let bad = |e: std::num::ParseIntError| format!("invalid seed list `{s}`: {e}");
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let range: RangeInclusive<u64> = lo.trim().parse().map_err(bad)?..=hi.trim().parse().map_err(bad)?;
        if range.is_empty() {
            return Err(format!("empty seed range `{s}`"));
        }
        return Ok(SeedList(range.collect()));
    }
    s.split(',')
        .map(|p| p.trim().parse().map_err(bad))
        .collect::<Result<_, _>>()
        .map(SeedList)
}

fn spec(sizes: &Sizes, seed: u64) -> Result<GeneratorSpec> {
    let spec = GeneratorSpec {
        m: sizes.m,
        k: sizes.k,
        n_bifunctions: sizes.n_bifunctions,
        m_maps: sizes.m_maps,
        seed,
    };
    if !spec.is_valid() {
        return Err(ModelError::DimensionMismatch("m, k, N and M must all be at least 1".into()).into());
    }
    Ok(spec)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn generate(args: GenerateArgs) -> Result<()> {
    let instance = generate_instance(&spec(&args.sizes, args.seed)?);
    fs::write(&args.out, instance_to_json(&instance)?).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let instance = instance_from_json(&read(&args.instance)?)?;
    let report = validate_instance(&instance);
    if !report.is_valid() {
        return Err(ModelError::InvalidInstance(report).into());
    }
    let mut config = match &args.config {
        Some(path) => config_from_json(&read(path)?)?,
        None => SolverConfig::standard(instance.num_bifunctions(), instance.num_maps()),
    };
    if let Some(alpha) = args.alpha {
        config.alpha = alpha.into();
    }
    if let Some(iters) = args.iters {
        config.max_iters = iters;
    }
    let report = run_on_instance(&instance, &config, &args.algorithm, &args.out_dir, args.threads)?;
    for s in &report.algorithms {
        match s.final_distance {
            Some(d) => println!("{}: {} iterations, D = {d:.6e}, {:.1} ms", s.algorithm, s.iterations, s.total_ms),
            None => println!("{}: {} iterations, {:.1} ms", s.algorithm, s.iterations, s.total_ms),
        }
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let template = if args.paper_defaults {
        GeneratorSpec::standard(0)
    } else {
        spec(&args.sizes, 0)?
    };
    if args.seeds.0.is_empty() {
        bail!(ModelError::DimensionMismatch("no seeds given".into()));
    }
    let entries = run_bench(&BenchOptions {
        seeds: args.seeds.0,
        template,
        out_dir: args.out_dir,
        workers: args.threads,
        max_iters: args.iters,
    })?;
    for e in &entries {
        let finals: Vec<String> = e
            .report
            .algorithms
            .iter()
            .map(|s| format!("{}={:.3e}", s.algorithm, s.final_distance.unwrap_or(f64::NAN)))
            .collect();
        println!("seed {:>2} {:<10} {}", e.seed, e.schedule, finals.join(" "));
    }
    Ok(())
}

/// 1 for anything wrong with the inputs, 2 when a solver run aborts.
fn exit_code(err: &anyhow::Error) -> u8 {
    let solver = err
        .downcast_ref::<SolverError>()
        .or_else(|| match err.downcast_ref::<ExperimentError>() {
            Some(ExperimentError::Solver(e)) => Some(e),
            _ => None,
        });
    match solver {
        Some(SolverError::InvalidInstance(_) | SolverError::InvalidConfig(_) | SolverError::MissingKnownSolution) => 1,
        Some(SolverError::ParameterOutOfRange { .. }) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
