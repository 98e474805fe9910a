//! Executes the cross product of an [`ExperimentPlan`] and averages the
//! repetitions of every coordinate.

use std::hash::Hasher;

use fnv::FnvHasher;
use log::{debug, info};
use rayon::prelude::*;
use ssd_core::sampling::SamplingRule;
use ssd_core::sketch::SketchFamily;
use ssd_core::solver::{run_cg_momentum, run_sd, run_ssd, run_ssdm, IterationTrace, SolveError, SolverConfig};
use ssd_core::System;

use crate::plan::{ExperimentPlan, Method};
use crate::BenchError;

/// One point of an averaged convergence curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub k: usize,
    pub residual: f64,
    pub rel_error: f64,
    /// Mean seconds since the start of the iteration loop.
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub method: Method,
    pub family: String,
    pub b_metric: &'static str,
    pub g_metric: &'static str,
    /// Rule label, `-` for the deterministic methods.
    pub rule: String,
    pub gamma: f64,
    pub omega: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub reps: usize,
    /// Runs that did not diverge (converged or hit `max_iters`).
    pub successes: usize,
    pub divergences: usize,
    pub converged: usize,
    pub mean_iters: f64,
    pub median_iters: f64,
    pub mean_final_residual: f64,
    pub mean_final_rel_error: f64,
    /// Not reproducible between invocations.
    pub mean_wall_s: f64,
    pub seeds: Vec<u64>,
    /// Pointwise mean over the successful runs, shorter runs holding their
    /// final value.
    pub trace: Vec<TracePoint>,
}

/// `seed ⊕ hash(dataset, family, rule, repetition)`. Method and momentum are
/// left out so that runs differing only in `γ` share their random draws.
pub fn derived_seed(base: u64, dataset: usize, family: &str, rule: &str, rep: usize) -> u64 {
    let mut h = FnvHasher::default();
    h.write_u64(dataset as u64);
    h.write(family.as_bytes());
    h.write_u8(0xff);
    h.write(rule.as_bytes());
    h.write_u8(0xff);
    h.write_u64(rep as u64);
    base ^ h.finish()
}

struct Coordinate {
    dataset: usize,
    rule: Option<SamplingRule>,
    gamma: f64,
}

enum RunOutcome {
    Finished(IterationTrace<f64>),
    Diverged,
}

fn solve(plan: &ExperimentPlan, system: &System, family: Option<&SketchFamily<'_, f64>>, coord: &Coordinate, seed: u64) -> Result<RunOutcome, BenchError> {
    let cfg = SolverConfig {
        omega: plan.omega,
        gamma: coord.gamma,
        max_iters: plan.max_iters,
        tol: plan.tol,
        seed,
        x0: plan.x0.clone(),
        check_every: plan.check_every,
        ..SolverConfig::default()
    };
    let result = match (plan.method, family, &coord.rule) {
        (Method::Ssd, Some(f), Some(rule)) => run_ssd(f, rule, &cfg),
        (Method::Ssdm, Some(f), Some(rule)) => run_ssdm(f, rule, &cfg),
        (Method::Sd, ..) => run_sd(system, &cfg),
        (Method::Cg, ..) => run_cg_momentum(system, &cfg),
        _ => unreachable!("stochastic coordinates carry a family and a rule"),
    };
    match result {
        Ok(trace) => Ok(RunOutcome::Finished(trace)),
        Err(SolveError::Diverged { trace }) => {
            debug!("run with seed {seed} diverged after {} iterations", trace.iterations);
            Ok(RunOutcome::Diverged)
        }
        Err(SolveError::Invalid(e)) => Err(e.into()),
    }
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    values.sum::<f64>() / n as f64
}

/// Pointwise mean on the union of check points; each run contributes its
/// latest record at or before `k`.
pub fn average_traces(traces: &[&IterationTrace<f64>]) -> Vec<TracePoint> {
    let mut ks: Vec<usize> = traces.iter().flat_map(|t| t.records.iter().map(|r| r.k)).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut cursors = vec![0usize; traces.len()];
    ks.into_iter()
        .map(|k| {
            let mut point = TracePoint {
                k,
                residual: 0.0,
                rel_error: 0.0,
                elapsed: 0.0,
            };
            for (t, cur) in traces.iter().zip(cursors.iter_mut()) {
                while *cur + 1 < t.records.len() && t.records[*cur + 1].k <= k {
                    *cur += 1;
                }
                let r = &t.records[*cur];
                point.residual += r.residual;
                point.rel_error += r.rel_error;
                point.elapsed += r.elapsed;
            }
            let n = traces.len() as f64;
            point.residual /= n;
            point.rel_error /= n;
            point.elapsed /= n;
            point
        })
        .collect()
}

/// Runs every coordinate of the plan `reps` times.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<ResultRow>, BenchError> {
    plan.validate()?;
    let (b_metric, g_metric) = plan.metrics();
    let systems = plan
        .datasets
        .iter()
        .map(|d| {
            d.load(plan.seed, b_metric, g_metric)
                .map_err(|e| BenchError::Dataset {
                    dataset: d.label(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let families = systems
        .iter()
        .map(|s| plan.method.is_stochastic().then(|| SketchFamily::new(s, plan.family)).transpose())
        .collect::<Result<Vec<_>, _>>()?;

    let mut coords = Vec::new();
    for (d, family) in families.iter().enumerate() {
        let rules: Vec<Option<SamplingRule>> = match family {
            Some(f) => {
                let mut rules: Vec<SamplingRule> = Vec::new();
                for spec in &plan.rules {
                    let rule = spec.resolve(f.q())?;
                    if !rules.contains(&rule) {
                        rules.push(rule);
                    }
                }
                rules.into_iter().map(Some).collect()
            }
            None => vec![None],
        };
        for rule in rules {
            for &gamma in &plan.effective_gammas() {
                coords.push(Coordinate { dataset: d, rule, gamma });
            }
        }
    }
    info!("running {} coordinates x {} repetitions", coords.len(), plan.reps);

    let family_label = plan.family.label();
    let rule_label = |c: &Coordinate| c.rule.map_or_else(|| "-".to_string(), |r| r.label());
    let jobs: Vec<(usize, usize, u64)> = coords
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| {
            let label = rule_label(c);
            let family_label = &family_label;
            (0..plan.reps).map(move |r| (ci, r, derived_seed(plan.seed, c.dataset, family_label, &label, r)))
        })
        .collect();

    let execute = || {
        jobs.par_iter()
            .map(|&(ci, _, seed)| {
                let c = &coords[ci];
                solve(plan, &systems[c.dataset], families[c.dataset].as_ref(), c, seed)
            })
            .collect::<Result<Vec<_>, _>>()
    };
    let outcomes = match plan.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| BenchError::config(format!("cannot start {w} workers: {e}")))?
            .install(execute)?,
        None => execute()?,
    };

    let rows = coords
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let runs = &outcomes[ci * plan.reps..(ci + 1) * plan.reps];
            let seeds = jobs[ci * plan.reps..(ci + 1) * plan.reps].iter().map(|j| j.2).collect();
            let traces: Vec<&IterationTrace<f64>> = runs
                .iter()
                .filter_map(|o| match o {
                    RunOutcome::Finished(t) => Some(t),
                    RunOutcome::Diverged => None,
                })
                .collect();
            let mut iters: Vec<f64> = traces.iter().map(|t| t.iterations as f64).collect();
            iters.sort_by(f64::total_cmp);
            ResultRow {
                dataset: plan.datasets[c.dataset].label(),
                method: plan.method,
                family: if plan.method.is_stochastic() { family_label.clone() } else { "-".into() },
                b_metric: b_metric.label(),
                g_metric: g_metric.label(),
                rule: rule_label(c),
                gamma: c.gamma,
                omega: plan.omega,
                tol: plan.tol,
                max_iters: plan.max_iters,
                reps: plan.reps,
                successes: traces.len(),
                divergences: plan.reps - traces.len(),
                converged: traces.iter().filter(|t| t.converged).count(),
                mean_iters: mean(iters.iter().copied()),
                median_iters: median(&iters),
                mean_final_residual: mean(traces.iter().map(|t| t.final_residual())),
                mean_final_rel_error: mean(traces.iter().map(|t| t.records.last().map_or(f64::NAN, |r| r.rel_error))),
                mean_wall_s: mean(traces.iter().map(|t| t.records.last().map_or(0.0, |r| r.elapsed))),
                seeds,
                trace: average_traces(&traces),
            }
        })
        .collect();
    Ok(rows)
}
