//! Experiment plans: datasets, method, sketch family, metric choice and the
//! rule and momentum grids swept over.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use log::warn;
use ssd_core::problem::{gen_gaussian_spd, load_libsvm, load_matrix_market, make_consistent, GenSpec, LibsvmOptions, Metric};
use ssd_core::sampling::{CappedRule, SamplingRule};
use ssd_core::sketch::SketchKind;
use ssd_core::solver::InitialPoint;
use ssd_core::System;

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ssd,
    Ssdm,
    Sd,
    Cg,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Ssd => "ssd",
            Method::Ssdm => "ssdm",
            Method::Sd => "sd",
            Method::Cg => "cg",
        }
    }

    /// Whether the method samples from a sketch family.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::Ssd | Method::Ssdm)
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ssd" => Ok(Method::Ssd),
            "ssdm" => Ok(Method::Ssdm),
            "sd" => Ok(Method::Sd),
            "cg" => Ok(Method::Cg),
            _ => Err(BenchError::config(format!("unknown method {s:?}"))),
        }
    }
}

pub fn parse_family(s: &str) -> Result<SketchKind, BenchError> {
    match s {
        "row" => Ok(SketchKind::Row),
        "lsqcol" => Ok(SketchKind::LsqColumn),
        "spectral" => Ok(SketchKind::Spectral),
        "full" => Ok(SketchKind::Full),
        _ => match s.strip_prefix("block:") {
            Some(c) => {
                let size = parse_count(c, "block size")?;
                Ok(SketchKind::Block { size })
            }
            None => Err(BenchError::config(format!("unknown family {s:?}"))),
        },
    }
}

fn parse_count(s: &str, what: &str) -> Result<usize, BenchError> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(BenchError::config(format!("{what} {s:?} must be a positive integer"))),
    }
}

/// Metric choice for `B` or `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricChoice {
    Identity,
    /// `A` itself (square SPD systems).
    System,
    /// `AᵀA`
    Gram,
}

impl MetricChoice {
    pub fn label(self) -> &'static str {
        match self {
            MetricChoice::Identity => "I",
            MetricChoice::System => "A",
            MetricChoice::Gram => "AtA",
        }
    }

    pub fn metric(self) -> Metric<f64> {
        match self {
            MetricChoice::Identity => Metric::Identity,
            MetricChoice::System => Metric::SystemMatrix,
            MetricChoice::Gram => Metric::Gram,
        }
    }

    /// `(B, G)` under which the family reduces to its classical method.
    pub fn defaults_for(family: SketchKind) -> (Self, Self) {
        match family {
            SketchKind::Row | SketchKind::Block { .. } => (MetricChoice::Identity, MetricChoice::Identity),
            SketchKind::LsqColumn => (MetricChoice::Gram, MetricChoice::Gram),
            SketchKind::Spectral => (MetricChoice::System, MetricChoice::System),
            // B = A, G = I is steepest descent
            SketchKind::Full => (MetricChoice::System, MetricChoice::Identity),
        }
    }
}

impl FromStr for MetricChoice {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" | "I" => Ok(MetricChoice::Identity),
            "system" | "A" => Ok(MetricChoice::System),
            "gram" | "AtA" => Ok(MetricChoice::Gram),
            _ => Err(BenchError::config(format!("unknown metric {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    /// Gaussian `m×n` or, with `spd`, the `n×n` Gram matrix of one.
    Generated { m: usize, n: usize, spd: bool },
    MatrixMarket(PathBuf),
    Libsvm(PathBuf),
}

impl DatasetSource {
    /// Parses `<m>x<n>` or `<m>x<n>:spd`.
    pub fn parse_gen(s: &str) -> Result<Self, BenchError> {
        let (dims, spd) = match s.strip_suffix(":spd") {
            Some(d) => (d, true),
            None => (s, false),
        };
        let (m, n) = dims
            .split_once('x')
            .ok_or_else(|| BenchError::config(format!("generator spec {s:?} must look like <m>x<n>[:spd]")))?;
        Ok(DatasetSource::Generated {
            m: parse_count(m, "row count")?,
            n: parse_count(n, "column count")?,
            spd,
        })
    }

    pub fn label(&self) -> String {
        match self {
            DatasetSource::Generated { m, n, spd: false } => format!("gauss:{m}x{n}"),
            DatasetSource::Generated { m, n, spd: true } => format!("gauss:{m}x{n}:spd"),
            DatasetSource::MatrixMarket(p) | DatasetSource::Libsvm(p) => p
                .file_name()
                .map_or_else(|| p.display().to_string(), |f| f.to_string_lossy().into_owned()),
        }
    }

    /// Loads the matrix and plants a solution drawn from `seed`. File
    /// datasets get the consistent right-hand side `b = A x*`.
    pub fn load(&self, seed: u64, b: MetricChoice, g: MetricChoice) -> Result<System, BenchError> {
        let system = match self {
            DatasetSource::Generated { m, n, spd: false } => GenSpec::gaussian(*m, *n, seed).generate()?,
            DatasetSource::Generated { m, n, spd: true } => gen_gaussian_spd(&GenSpec::gaussian_spd(*m, *n, seed))?,
            DatasetSource::MatrixMarket(path) => make_consistent(load_matrix_market(path)?, seed, None, None)?,
            DatasetSource::Libsvm(path) => make_consistent(load_libsvm(path, LibsvmOptions::default())?, seed, None, None)?,
        };
        Ok(system.with_metrics(b.metric(), g.metric())?)
    }
}

/// Sample size in a rule spec; `All` resolves to the family size `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauSpec {
    Fixed(usize),
    All,
}

impl TauSpec {
    /// Sizes above `q` are clamped to `q`.
    fn resolve(self, q: usize) -> usize {
        match self {
            TauSpec::Fixed(t) if t > q => {
                warn!("sample size {t} exceeds the family size {q}; using {q}");
                q
            }
            TauSpec::Fixed(t) => t,
            TauSpec::All => q,
        }
    }
}

impl FromStr for TauSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "m" | "q" => Ok(TauSpec::All),
            _ => parse_count(s, "sample size").map(TauSpec::Fixed),
        }
    }
}

/// A sampling rule whose sample sizes may depend on the family size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleSpec {
    Uniform,
    Greedy(TauSpec),
    MaxDistance,
    Capped {
        theta: f64,
        tau1: TauSpec,
        tau2: TauSpec,
        exact: bool,
    },
}

impl RuleSpec {
    pub fn resolve(self, q: usize) -> Result<SamplingRule, BenchError> {
        let rule = match self {
            RuleSpec::Uniform => SamplingRule::Uniform,
            RuleSpec::MaxDistance => SamplingRule::MaxDistance,
            RuleSpec::Greedy(t) => SamplingRule::Greedy { tau: t.resolve(q) },
            RuleSpec::Capped {
                theta,
                tau1,
                tau2,
                exact,
            } => {
                let c = CappedRule::new(theta, tau1.resolve(q), tau2.resolve(q));
                SamplingRule::Capped(if exact { c.exact() } else { c })
            }
        };
        Ok(rule.normalized(q)?)
    }
}

impl FromStr for RuleSpec {
    type Err = BenchError;

    /// `uniform | greedy:<τ> | maxdist | capped:<θ>,<τ₁>,<τ₂>[,exact]`, with
    /// `m` standing for the family size.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => return Ok(RuleSpec::Uniform),
            "maxdist" => return Ok(RuleSpec::MaxDistance),
            _ => {}
        }
        if let Some(t) = s.strip_prefix("greedy:") {
            return Ok(RuleSpec::Greedy(t.parse()?));
        }
        let Some(args) = s.strip_prefix("capped:") else {
            return Err(BenchError::config(format!("unknown rule {s:?}")));
        };
        let parts: Vec<&str> = args.split(',').collect();
        let exact = match parts.get(3) {
            None => false,
            Some(&"exact") if parts.len() == 4 => true,
            _ => return Err(BenchError::config(format!("capped rule {s:?} must be capped:<theta>,<tau1>,<tau2>[,exact]"))),
        };
        if parts.len() < 3 {
            return Err(BenchError::config(format!("capped rule {s:?} needs theta, tau1 and tau2")));
        }
        let theta: f64 = parts[0]
            .parse()
            .map_err(|_| BenchError::config(format!("capped theta {:?} is not a number", parts[0])))?;
        if !(0.0..=1.0).contains(&theta) {
            return Err(BenchError::config(format!("capped theta {theta} must lie in [0, 1]")));
        }
        Ok(RuleSpec::Capped {
            theta,
            tau1: parts[1].parse()?,
            tau2: parts[2].parse()?,
            exact,
        })
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tau = |t: &TauSpec| match t {
            TauSpec::Fixed(v) => v.to_string(),
            TauSpec::All => "m".into(),
        };
        match self {
            RuleSpec::Uniform => write!(f, "uniform"),
            RuleSpec::MaxDistance => write!(f, "maxdist"),
            RuleSpec::Greedy(t) => write!(f, "greedy:{}", tau(t)),
            RuleSpec::Capped {
                theta,
                tau1,
                tau2,
                exact,
            } => write!(f, "capped:{theta},{},{}{}", tau(tau1), tau(tau2), if *exact { ",exact" } else { "" }),
        }
    }
}

/// Named parameter sets for the greedy Kaczmarz and greedy coordinate
/// descent sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    GreedyKaczmarz,
    GreedyCd,
}

impl Preset {
    pub fn rules(self) -> Vec<RuleSpec> {
        let taus: &[usize] = match self {
            Preset::GreedyKaczmarz => &[1, 5, 20, 50, 100],
            Preset::GreedyCd => &[1, 5, 10, 20, 30],
        };
        let mut rules: Vec<RuleSpec> = taus.iter().map(|&t| RuleSpec::Greedy(TauSpec::Fixed(t))).collect();
        rules.push(RuleSpec::Greedy(TauSpec::All));
        if self == Preset::GreedyKaczmarz {
            rules.push(RuleSpec::Capped {
                theta: 0.5,
                tau1: TauSpec::Fixed(1),
                tau2: TauSpec::All,
                exact: false,
            });
        }
        rules
    }

    /// Dataset, family and metrics of the preset.
    pub fn dataset(self) -> DatasetSource {
        match self {
            Preset::GreedyKaczmarz => DatasetSource::Generated { m: 200, n: 60, spd: false },
            Preset::GreedyCd => DatasetSource::Generated { m: 40, n: 20, spd: true },
        }
    }

    pub fn metrics(self) -> (MetricChoice, MetricChoice) {
        match self {
            Preset::GreedyKaczmarz => (MetricChoice::Identity, MetricChoice::Identity),
            // coordinate descent: row sketches with B = G = A
            Preset::GreedyCd => (MetricChoice::System, MetricChoice::System),
        }
    }
}

impl FromStr for Preset {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper-gk" => Ok(Preset::GreedyKaczmarz),
            "paper-gcd" => Ok(Preset::GreedyCd),
            _ => Err(BenchError::config(format!("unknown preset {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub datasets: Vec<DatasetSource>,
    pub method: Method,
    pub family: SketchKind,
    /// `None` picks [`MetricChoice::defaults_for`] the family.
    pub metrics: Option<(MetricChoice, MetricChoice)>,
    pub rules: Vec<RuleSpec>,
    pub gammas: Vec<f64>,
    pub omega: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub reps: usize,
    /// Seeds the datasets and, hashed with the coordinates, every run.
    pub seed: u64,
    pub x0: InitialPoint<f64>,
    /// Residual check period; `None` uses the solver default.
    pub check_every: Option<usize>,
    /// Thread count; `None` uses all cores.
    pub workers: Option<usize>,
    /// Add spectral constants and predicted rates to the metadata.
    pub theory: bool,
}

impl ExperimentPlan {
    pub fn new(dataset: DatasetSource) -> Self {
        Self {
            datasets: vec![dataset],
            method: Method::Ssd,
            family: SketchKind::Row,
            metrics: None,
            rules: vec![RuleSpec::Uniform],
            gammas: vec![0.0],
            omega: 1.0,
            tol: 1e-10,
            max_iters: 1_000_000,
            reps: 10,
            seed: 0,
            x0: InitialPoint::Thousands,
            check_every: None,
            workers: None,
            theory: false,
        }
    }

    pub fn preset(preset: Preset) -> Self {
        Self {
            rules: preset.rules(),
            metrics: Some(preset.metrics()),
            ..Self::new(preset.dataset())
        }
    }

    pub fn metrics(&self) -> (MetricChoice, MetricChoice) {
        self.metrics.unwrap_or_else(|| MetricChoice::defaults_for(self.family))
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.reps == 0 {
            return Err(BenchError::config("reps must be at least 1"));
        }
        if self.datasets.is_empty() || self.rules.is_empty() || self.gammas.is_empty() {
            return Err(BenchError::config("dataset, rule and gamma grids must be nonempty"));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(BenchError::config(format!("omega = {} must lie in (0, 2)", self.omega)));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(BenchError::config(format!("gamma = {g} must be >= 0")));
        }
        if !(self.tol > 0.0) {
            return Err(BenchError::config(format!("tol = {} must be > 0", self.tol)));
        }
        if self.check_every == Some(0) {
            return Err(BenchError::config("check_every must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(BenchError::config("workers must be at least 1"));
        }
        Ok(())
    }

    /// Momentum values actually swept: plain SSD and the deterministic
    /// methods run without momentum.
    pub fn effective_gammas(&self) -> Vec<f64> {
        if self.method == Method::Ssdm {
            self.gammas.clone()
        } else {
            if self.gammas.iter().any(|g| *g != 0.0) {
                warn!("method {} ignores the gamma grid", self.method.label());
            }
            vec![0.0]
        }
    }

    /// `key=value` description of the plan.
    pub fn describe(&self) -> String {
        let (b, g) = self.metrics();
        let list = |items: Vec<String>| items.join(";");
        [
            format!("datasets={}", list(self.datasets.iter().map(DatasetSource::label).collect())),
            format!("method={}", self.method.label()),
            format!("family={}", self.family.label()),
            format!("b_metric={}", b.label()),
            format!("g_metric={}", g.label()),
            format!("rules={}", list(self.rules.iter().map(ToString::to_string).collect())),
            format!("gammas={}", list(self.gammas.iter().map(ToString::to_string).collect())),
            format!("omega={}", self.omega),
            format!("tol={}", self.tol),
            format!("max_iters={}", self.max_iters),
            format!("reps={}", self.reps),
            format!("seed={}", self.seed),
            format!("x0={}", self.x0.label()),
            format!("check_every={}", self.check_every.map_or_else(|| "default".into(), |c| c.to_string())),
        ]
        .join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_grammar() {
        assert_eq!("uniform".parse::<RuleSpec>().unwrap(), RuleSpec::Uniform);
        assert_eq!("greedy:5".parse::<RuleSpec>().unwrap(), RuleSpec::Greedy(TauSpec::Fixed(5)));
        assert_eq!(
            "capped:0.5,1,m,exact".parse::<RuleSpec>().unwrap(),
            RuleSpec::Capped {
                theta: 0.5,
                tau1: TauSpec::Fixed(1),
                tau2: TauSpec::All,
                exact: true
            }
        );
        for bad in ["greedy:0", "greedy:x", "capped:2,1,1", "capped:0.5,1", "capped:0.5,1,2,fast", "random"] {
            assert!(bad.parse::<RuleSpec>().is_err(), "{bad}");
        }
        for s in ["uniform", "greedy:m", "capped:0.25,2,7,exact"] {
            assert_eq!(s.parse::<RuleSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn resolution_clamps_and_normalizes() {
        let q = 20;
        assert_eq!(RuleSpec::Greedy(TauSpec::Fixed(30)).resolve(q).unwrap(), SamplingRule::MaxDistance);
        assert_eq!(RuleSpec::Greedy(TauSpec::Fixed(1)).resolve(q).unwrap(), SamplingRule::Uniform);
        assert_eq!(RuleSpec::Greedy(TauSpec::Fixed(5)).resolve(q).unwrap(), SamplingRule::Greedy { tau: 5 });
    }

    #[test]
    fn family_and_dataset_syntax() {
        assert_eq!(parse_family("block:4").unwrap(), SketchKind::Block { size: 4 });
        assert!(parse_family("block:0").is_err());
        assert_eq!(
            DatasetSource::parse_gen("40x20:spd").unwrap(),
            DatasetSource::Generated { m: 40, n: 20, spd: true }
        );
        assert!(DatasetSource::parse_gen("40by20").is_err());
    }

    #[test]
    fn plan_validation() {
        let mut plan = ExperimentPlan::preset(Preset::GreedyKaczmarz);
        assert!(plan.validate().is_ok());
        assert_eq!(plan.rules.len(), 7);
        plan.reps = 0;
        assert!(plan.validate().is_err());
        plan.reps = 1;
        plan.gammas.clear();
        assert!(plan.validate().is_err());
    }
}
