//! CSV, metadata and plot-series writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ssd_core::sketch::SketchFamily;
use ssd_core::theory::{momentum_gamma_bound, momentum_rate, predicted_rates, spectral_report, MAX_THEORY_DIM};

use crate::plan::{ExperimentPlan, Method};
use crate::runner::ResultRow;
use crate::BenchError;

/// Marks CSV columns whose values differ between identical invocations.
pub const NONDETERMINISTIC_SUFFIX: &str = "_nondet";

pub const CSV_COLUMNS: [&str; 19] = [
    "dataset",
    "method",
    "family",
    "b_metric",
    "g_metric",
    "rule",
    "gamma",
    "omega",
    "tol",
    "max_iters",
    "reps",
    "successes",
    "divergences",
    "converged",
    "mean_iters",
    "median_iters",
    "mean_final_residual",
    "mean_final_rel_error",
    "mean_wall_s_nondet",
];

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Shortest decimal that parses back to the same `f64`, in exponent form
/// for very large or small magnitudes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn record(row: &ResultRow) -> [String; 19] {
    [
        row.dataset.clone(),
        row.method.label().into(),
        row.family.clone(),
        row.b_metric.into(),
        row.g_metric.into(),
        row.rule.clone(),
        num(row.gamma),
        num(row.omega),
        num(row.tol),
        row.max_iters.to_string(),
        row.reps.to_string(),
        row.successes.to_string(),
        row.divergences.to_string(),
        row.converged.to_string(),
        num(row.mean_iters),
        num(row.median_iters),
        num(row.mean_final_residual),
        num(row.mean_final_rel_error),
        num(row.mean_wall_s),
    ]
}

/// Writes the summary CSV to `path` and the plan, seeds and (optionally)
/// the theory dump to `<path>.meta`.
pub fn emit_csv(rows: &[ResultRow], plan: &ExperimentPlan, path: &Path) -> Result<(), BenchError> {
    if rows.is_empty() {
        return Err(BenchError::config("no result rows to write"));
    }
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(CSV_COLUMNS)?;
    for row in rows {
        out.write_record(record(row))?;
    }
    let bytes = out.into_inner().map_err(|e| BenchError::config(format!("csv buffer: {e}")))?;
    fs::write(path, bytes).map_err(io_error(path))?;

    let mut meta = plan.describe();
    meta.push('\n');
    for (i, row) in rows.iter().enumerate() {
        let seeds: Vec<String> = row.seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(meta, "row.{i}.coordinate={}|{}|{}", row.dataset, row.rule, row.gamma);
        let _ = writeln!(meta, "row.{i}.seeds={}", seeds.join(";"));
    }
    if plan.theory {
        meta.push_str(&theory_dump(plan)?);
    }
    let meta_path = meta_path(path);
    fs::write(&meta_path, meta).map_err(io_error(&meta_path))
}

pub fn meta_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '-' })
        .collect()
}

/// Writes one `k,residual,relerr,time` series per row into `dir` and
/// returns the file paths.
pub fn emit_plot_data(rows: &[ResultRow], dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let name = format!(
                "{i:03}_{}_{}_{}_{}_g{:?}.csv",
                sanitize(&row.dataset),
                row.method.label(),
                sanitize(&row.family),
                sanitize(&row.rule),
                row.gamma
            );
            let path = dir.join(name);
            let mut body = String::from("k,residual,relerr,time\n");
            for p in &row.trace {
                let _ = writeln!(body, "{},{},{},{}", p.k, num(p.residual), num(p.rel_error), num(p.elapsed));
            }
            fs::write(&path, body).map_err(io_error(&path))?;
            Ok(path)
        })
        .collect()
}

/// Spectral constants, predicted rates and momentum parameters for every
/// dataset and rule of the plan, as `theory.*` key=value lines.
pub fn theory_dump(plan: &ExperimentPlan) -> Result<String, BenchError> {
    let mut out = String::new();
    if !plan.method.is_stochastic() {
        out.push_str("theory=skipped (deterministic method)\n");
        return Ok(out);
    }
    let (b, g) = plan.metrics();
    for dataset in &plan.datasets {
        let system = dataset.load(plan.seed, b, g)?;
        let label = dataset.label();
        if system.n() > MAX_THEORY_DIM {
            let _ = writeln!(out, "theory.{label}=skipped (n = {} > {MAX_THEORY_DIM})", system.n());
            continue;
        }
        let family = SketchFamily::new(&system, plan.family)?;
        let mut rules = Vec::new();
        for spec in &plan.rules {
            let rule = spec.resolve(family.q())?;
            if !rules.contains(&rule) {
                rules.push(rule);
            }
        }
        for rule in rules {
            let prefix = format!("theory.{label}.{}", rule.label());
            let report = spectral_report(&family, &rule, 0)?;
            for line in report.to_key_values().lines() {
                let _ = writeln!(out, "{prefix}.{line}");
            }
            let rates = predicted_rates(&report, plan.omega)?;
            let _ = writeln!(out, "{prefix}.psd_factor={:e}", rates.psd_factor);
            if let Some(pd) = rates.pd_factor {
                let _ = writeln!(out, "{prefix}.pd_factor={:e} (best {:e}, worst {:e})", pd.uniform, pd.best, pd.worst);
            }
            let fd = rates.function_decay;
            let _ = writeln!(out, "{prefix}.function_decay={:e} (best {:e}, worst {:e})", fd.uniform, fd.best, fd.worst);
            let _ = writeln!(out, "{prefix}.f_cesaro_coefficient={:e}", rates.f_cesaro_coefficient);
            let _ = writeln!(out, "{prefix}.x_cesaro_coefficient={:e}", rates.x_cesaro_coefficient);
            if plan.method == Method::Ssdm {
                let c = &report.constants;
                let _ = writeln!(out, "{prefix}.gamma_bound={:e}", momentum_gamma_bound(c, 0.0, 0.0, plan.omega));
                for &gamma in &plan.gammas {
                    match momentum_rate(c, 0.0, 0.0, gamma, plan.omega) {
                        Ok(p) => {
                            let _ = writeln!(
                                out,
                                "{prefix}.gamma.{gamma}=phi1 {:e}, phi2 {:e}, rho {:e}, admissible {}",
                                p.phi1, p.phi2, p.rho, p.admissible
                            );
                        }
                        Err(e) => {
                            let _ = writeln!(out, "{prefix}.gamma.{gamma}=unavailable ({e})");
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
