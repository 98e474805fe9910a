use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::{error, info, warn};
use ssd_bench::plan::{parse_family, DatasetSource, ExperimentPlan, Method, MetricChoice, Preset, RuleSpec};
use ssd_bench::{emit_csv, emit_plot_data, run_experiment, BenchError};
use ssd_core::solver::InitialPoint;

/// Sweeps SSD/SSDM runs over sampling rules and momentum values and writes
/// averaged results as CSV.
///
/// Exit status: 0 on success, 2 when any run diverged, 1 on configuration or
/// I/O errors.
#[derive(Debug, Parser)]
#[command(name = "ssd-bench", version)]
struct Cli {
    /// Parameter preset: paper-gk (greedy Kaczmarz, 200x60) or paper-gcd
    /// (greedy coordinate descent on a 20x20 SPD matrix). Explicit flags
    /// override its dataset, rules and metrics.
    #[arg(long)]
    preset: Option<Preset>,
    /// ssd | ssdm | sd | cg
    #[arg(long, default_value = "ssd")]
    method: Method,
    /// row | lsqcol | block:<c> | spectral | full
    #[arg(long, default_value = "row", value_parser = parse_family_arg)]
    family: ssd_core::sketch::SketchKind,
    /// uniform | greedy:<tau> | maxdist | capped:<theta>,<tau1>,<tau2>[,exact];
    /// repeat the flag for a grid, `m` stands for the family size.
    #[arg(long = "rule")]
    rules: Vec<RuleSpec>,
    /// Comma-separated momentum values.
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Halting threshold on ‖Ax - b‖.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// paper (1000·ones) | zero | range (projected onto Range(G⁻¹Aᵀ))
    #[arg(long, default_value = "paper", value_parser = parse_x0)]
    x0: InitialPoint<f64>,
    /// Metric B: identity | system | gram. Defaults depend on the family.
    #[arg(long)]
    b_metric: Option<MetricChoice>,
    /// Metric G: identity | system | gram. Defaults depend on the family.
    #[arg(long)]
    g_metric: Option<MetricChoice>,
    /// Matrix Market file; b is synthesized from a planted solution.
    #[arg(long, group = "data")]
    matrix: Option<PathBuf>,
    /// LIBSVM file; b is synthesized from a planted solution.
    #[arg(long, group = "data")]
    libsvm: Option<PathBuf>,
    /// Gaussian generator <m>x<n>, or <m>x<n>:spd for the n×n Gram matrix.
    #[arg(long, group = "data")]
    gen: Option<String>,
    /// Residual check period.
    #[arg(long)]
    check_every: Option<usize>,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Directory for per-coordinate k,residual,relerr,time series.
    #[arg(long)]
    plot_data: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Append spectral constants and predicted rates to the metadata file.
    #[arg(long)]
    theory: bool,
}

fn parse_family_arg(s: &str) -> Result<ssd_core::sketch::SketchKind, String> {
    parse_family(s).map_err(|e| e.to_string())
}

fn parse_x0(s: &str) -> Result<InitialPoint<f64>, String> {
    match s {
        "paper" => Ok(InitialPoint::Thousands),
        "zero" => Ok(InitialPoint::Zero),
        "range" => Ok(InitialPoint::RangeProjected),
        _ => Err(format!("unknown initial point {s:?}")),
    }
}

impl Cli {
    fn plan(&self) -> Result<ExperimentPlan, BenchError> {
        let dataset = match (&self.matrix, &self.libsvm, &self.gen) {
            (Some(p), _, _) => Some(DatasetSource::MatrixMarket(p.clone())),
            (_, Some(p), _) => Some(DatasetSource::Libsvm(p.clone())),
            (_, _, Some(g)) => Some(DatasetSource::parse_gen(g)?),
            _ => None,
        };
        let mut plan = match (self.preset, dataset) {
            (Some(p), data) => {
                let mut plan = ExperimentPlan::preset(p);
                if let Some(d) = data {
                    plan.datasets = vec![d];
                }
                plan
            }
            (None, Some(d)) => ExperimentPlan::new(d),
            (None, None) => return Err(BenchError::config("one of --matrix, --libsvm, --gen or --preset is required")),
        };
        plan.method = self.method;
        plan.family = self.family;
        if !self.rules.is_empty() {
            plan.rules = self.rules.clone();
        }
        if !self.gamma.is_empty() {
            plan.gammas = self.gamma.clone();
        }
        if self.b_metric.is_some() || self.g_metric.is_some() {
            let (b, g) = plan.metrics();
            plan.metrics = Some((self.b_metric.unwrap_or(b), self.g_metric.unwrap_or(g)));
        }
        plan.omega = self.omega;
        plan.tol = self.tol;
        plan.max_iters = self.max_iters;
        plan.seed = self.seed;
        plan.reps = self.reps;
        plan.x0 = self.x0.clone();
        plan.check_every = self.check_every;
        plan.workers = self.workers;
        plan.theory = self.theory;
        plan.validate()?;
        Ok(plan)
    }
}

fn run(cli: &Cli) -> Result<bool, BenchError> {
    let plan = cli.plan()?;
    let rows = run_experiment(&plan)?;
    emit_csv(&rows, &plan, &cli.out)?;
    info!("wrote {} rows to {}", rows.len(), cli.out.display());
    if let Some(dir) = &cli.plot_data {
        let files = emit_plot_data(&rows, dir)?;
        info!("wrote {} series to {}", files.len(), dir.display());
    }
    let divergent: usize = rows.iter().map(|r| r.divergences).sum();
    if divergent > 0 {
        warn!("{divergent} runs diverged");
    }
    Ok(divergent == 0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            error!("{e}");
            ExitCode::from(1)
        }
    }
}
