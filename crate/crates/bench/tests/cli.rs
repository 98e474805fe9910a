use std::path::Path;
use std::process::Command;

use ssd_bench::plan::{DatasetSource, ExperimentPlan, Method, RuleSpec, TauSpec};
use ssd_bench::{derived_seed, emit_csv, emit_plot_data, run_experiment, CSV_COLUMNS};
use ssd_core::sampling::SamplingRule;
use ssd_core::sketch::SketchFamily;
use ssd_core::solver::{run_ssd, SolverConfig};

fn small_plan() -> ExperimentPlan {
    ExperimentPlan {
        rules: vec![RuleSpec::Greedy(TauSpec::Fixed(3))],
        reps: 3,
        seed: 5,
        max_iters: 50_000,
        ..ExperimentPlan::new(DatasetSource::Generated { m: 30, n: 8, spd: false })
    }
}

fn bench() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ssd-bench"));
    cmd.env("RUST_LOG", "off").stderr(std::process::Stdio::null());
    cmd
}

fn rows_of(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn one_coordinate_writes_header_and_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let plan = small_plan();
    let rows = run_experiment(&plan).unwrap();
    emit_csv(&rows, &plan, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header, CSV_COLUMNS);
    assert!(dir.path().join("out.csv.meta").exists());
}

#[test]
fn csv_floats_parse_back_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let plan = small_plan();
    let rows = run_experiment(&plan).unwrap();
    emit_csv(&rows, &plan, &path).unwrap();
    let rec = &rows_of(&path)[0];
    let col = |name: &str| rec.get(CSV_COLUMNS.iter().position(|c| *c == name).unwrap()).unwrap();
    let row = &rows[0];
    assert_eq!(col("mean_iters").parse::<f64>().unwrap(), row.mean_iters);
    assert_eq!(col("mean_final_residual").parse::<f64>().unwrap(), row.mean_final_residual);
    assert_eq!(col("mean_final_rel_error").parse::<f64>().unwrap(), row.mean_final_rel_error);
    assert_eq!(col("tol").parse::<f64>().unwrap(), row.tol);
    assert_eq!(col("reps"), "3");
}

#[test]
fn zero_momentum_reproduces_plain_ssd() {
    let plain = run_experiment(&small_plan()).unwrap();
    let heavy = run_experiment(&ExperimentPlan {
        method: Method::Ssdm,
        gammas: vec![0.0],
        ..small_plan()
    })
    .unwrap();
    assert_eq!(plain[0].seeds, heavy[0].seeds);
    assert_eq!(plain[0].mean_iters, heavy[0].mean_iters);
    assert_eq!(plain[0].mean_final_residual, heavy[0].mean_final_residual);
    assert_eq!(plain[0].mean_final_rel_error, heavy[0].mean_final_rel_error);
}

#[test]
fn single_repetition_matches_a_direct_solve() {
    let plan = ExperimentPlan { reps: 1, ..small_plan() };
    let row = run_experiment(&plan).unwrap().remove(0);
    let (b, g) = plan.metrics();
    let system = plan.datasets[0].load(plan.seed, b, g).unwrap();
    let family = SketchFamily::new(&system, plan.family).unwrap();
    let rule = SamplingRule::Greedy { tau: 3 };
    let seed = derived_seed(plan.seed, 0, &plan.family.label(), &rule.label(), 0);
    let cfg = SolverConfig {
        max_iters: plan.max_iters,
        tol: plan.tol,
        seed,
        ..SolverConfig::default()
    };
    let direct = run_ssd(&family, &rule, &cfg).unwrap();
    assert_eq!(row.seeds, vec![seed]);
    assert_eq!(row.mean_iters, direct.iterations as f64);
    assert_eq!(row.mean_final_residual, direct.final_residual());
}

#[test]
fn plot_series_cover_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let plan = ExperimentPlan {
        rules: vec![RuleSpec::Uniform, RuleSpec::MaxDistance],
        ..small_plan()
    };
    let rows = run_experiment(&plan).unwrap();
    let files = emit_plot_data(&rows, dir.path()).unwrap();
    assert_eq!(files.len(), 2);
    for (file, row) in files.iter().zip(&rows) {
        let text = std::fs::read_to_string(file).unwrap();
        assert_eq!(text.lines().next(), Some("k,residual,relerr,time"));
        assert_eq!(text.lines().count(), row.trace.len() + 1);
    }
}

#[test]
fn binary_succeeds_on_a_small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let plots = dir.path().join("plots");
    let status = bench()
        .args(["--gen", "30x8", "--rule", "uniform", "--rule", "greedy:m", "--reps", "2", "--theory"])
        .arg("--out")
        .arg(&out)
        .arg("--plot-data")
        .arg(&plots)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(rows_of(&out).len(), 2);
    assert_eq!(std::fs::read_dir(&plots).unwrap().count(), 2);
    let meta = std::fs::read_to_string(dir.path().join("r.csv.meta")).unwrap();
    assert!(meta.contains("theory."));
}

#[test]
fn binary_reports_divergence_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let status = bench()
        .args(["--gen", "30x8", "--method", "ssdm", "--gamma", "5", "--reps", "2", "--max-iters", "100000"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let rec = &rows_of(&out)[0];
    let divergences = CSV_COLUMNS.iter().position(|c| *c == "divergences").unwrap();
    assert_eq!(rec.get(divergences), Some("2"));
}

#[test]
fn binary_rejects_bad_input_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let unknown_flag = bench().args(["--gen", "30x8", "--bogus"]).status().unwrap();
    assert_eq!(unknown_flag.code(), Some(1));
    let missing_file = bench().args(["--matrix", "/nonexistent/a.mtx"]).arg("--out").arg(&out).status().unwrap();
    assert_eq!(missing_file.code(), Some(1));
    let no_data = bench().status().unwrap();
    assert_eq!(no_data.code(), Some(1));
    assert!(!out.exists());
}
