//! Experiment driver: runs algorithms on one instance and writes one CSV per
//! algorithm plus a JSON summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, SolverError};
use crate::generator::{generate_instance, GeneratorSpec};
use crate::model::{AlphaSchedule, ProblemInstance, SolverConfig};
use crate::schema::instance_to_json;
use crate::solver::{Algorithm, Solver};
use crate::trace::IterationTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub csv: String,
    pub iterations: usize,
    pub final_distance: Option<f64>,
    pub min_descent_slack: Option<f64>,
    pub total_ms: f64,
    pub mean_iteration_ms: f64,
    pub iteration_ms: Vec<f64>,
}

impl AlgorithmSummary {
    fn from_trace(trace: &IterationTrace, csv: String) -> Self {
        let min_descent_slack = trace
            .records
            .iter()
            .filter_map(|r| r.descent_slack)
            .reduce(f64::min);
        Self {
            algorithm: trace.algorithm,
            csv,
            iterations: trace.iterations(),
            final_distance: trace.final_distance(),
            min_descent_slack,
            total_ms: trace.total_ms(),
            mean_iteration_ms: trace.mean_iteration_ms(),
            iteration_ms: trace.records.iter().skip(1).map(|r| r.elapsed_ms).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub generator: Option<GeneratorSpec>,
    pub rho: f64,
    pub c1: f64,
    pub c2: f64,
    pub workers: Option<usize>,
    pub config: SolverConfig,
    pub algorithms: Vec<AlgorithmSummary>,
}

impl ExperimentReport {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|s| s.algorithm == algorithm)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_trace(trace: &IterationTrace, path: &Path) -> Result<(), ExperimentError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    trace
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|source| ExperimentError::Csv {
            path: path.to_path_buf(),
            source,
        })
}

/// Runs every algorithm in `algorithms` on `instance` and writes
/// `<out_dir>/<alg>.csv` and `<out_dir>/summary.json`.
///
/// `workers = None` uses the global rayon pool. A solver failure is returned
/// after the partial trace (if any) has been written.
pub fn run_on_instance(
    instance: &ProblemInstance,
    config: &SolverConfig,
    algorithms: &[Algorithm],
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<ExperimentReport, ExperimentError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let solver = Solver::new(instance, config)?;
    let mut report = ExperimentReport {
        seed: config.seed,
        generator: None,
        rho: solver.rho(),
        c1: solver.constants().c1,
        c2: solver.constants().c2,
        workers,
        config: config.clone(),
        algorithms: Vec::new(),
    };
    for &alg in algorithms {
        let csv = format!("{}.csv", alg.name());
        let path = out_dir.join(&csv);
        let result = match workers {
            Some(w) => solver.run_with_workers(alg, w),
            None => solver.run(alg),
        };
        let trace = match result {
            Ok(trace) => trace,
            Err(SolverError::Aborted { partial, cause }) => {
                write_trace(&partial, &path)?;
                return Err(SolverError::Aborted { partial, cause }.into());
            }
            Err(e) => return Err(e.into()),
        };
        write_trace(&trace, &path)?;
        report.algorithms.push(AlgorithmSummary::from_trace(&trace, csv));
    }
    let path = out_dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&report)?).map_err(io_err(&path))?;
    Ok(report)
}

/// Generates the instance for `spec`, saves it as `instance.json` and runs
/// [`run_on_instance`].
pub fn run_experiment(
    spec: &GeneratorSpec,
    config: &SolverConfig,
    algorithms: &[Algorithm],
    out_dir: &Path,
    workers: Option<usize>,
) -> Result<ExperimentReport, ExperimentError> {
    let instance = generate_instance(spec);
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let path = out_dir.join("instance.json");
    fs::write(&path, instance_to_json(&instance)?).map_err(io_err(&path))?;
    let mut config = config.clone();
    config.seed = spec.seed;
    let mut report = run_on_instance(&instance, &config, algorithms, out_dir, workers)?;
    report.generator = Some(*spec);
    let path = out_dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&report)?).map_err(io_err(&path))?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub seeds: Vec<u64>,
    /// Instance sizes; the seed field is replaced by each entry of `seeds`.
    pub template: GeneratorSpec,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
    pub max_iters: usize,
}

/// One entry per (seed, schedule).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub seed: u64,
    pub schedule: String,
    pub report: ExperimentReport,
}

/// The default experiment over every seed and both step schedules, laid out
/// as `<out>/seed-XX/<schedule>/<alg>.csv`, with an index in `<out>/bench.json`.
pub fn run_bench(options: &BenchOptions) -> Result<Vec<BenchEntry>, ExperimentError> {
    let mut entries = Vec::new();
    for &seed in &options.seeds {
        let spec = GeneratorSpec {
            seed,
            ..options.template
        };
        for schedule in [AlphaSchedule::InvN, AlphaSchedule::InvSqrtN] {
            let mut config = SolverConfig::standard(spec.n_bifunctions, spec.m_maps);
            config.alpha = schedule.clone();
            config.max_iters = options.max_iters;
            let dir = options
                .out_dir
                .join(format!("seed-{seed:02}"))
                .join(schedule.name());
            let report = run_experiment(&spec, &config, &Algorithm::ALL, &dir, options.workers)?;
            entries.push(BenchEntry {
                seed,
                schedule: schedule.name().to_string(),
                report,
            });
        }
    }
    let path = options.out_dir.join("bench.json");
    fs::write(&path, serde_json::to_string_pretty(&entries)?).map_err(io_err(&path))?;
    Ok(entries)
}
