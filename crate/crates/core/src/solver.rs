//! Iteration engines: stochastic steepest descent with optional heavy-ball
//! momentum, deterministic steepest descent and conjugate gradients written
//! as steepest descent with adaptive momentum.

use std::time::Instant;

use log::debug;

use crate::error::{Error, Result};
use crate::linalg::{pinv_psd, sym_eig, SpdFactor};
use crate::problem::LinearSystem;
use crate::rng::{stream_rng, SsdRng};
use crate::sampling::{expectation_over_losses, select, SamplingRule};
use crate::scalar::{axpy, dot, norm, norm_sq, sub, Scalar};
use crate::sketch::{validate_omega, SketchFamily};

/// Iterates with norm above this are treated as divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;
/// Largest `n` for which a missing reference solution is computed.
pub const PINV_REFERENCE_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialPoint<T> {
    /// `1000 · (1, ..., 1)`
    Thousands,
    Zero,
    /// `1000 · (1, ..., 1)` projected G-orthogonally onto `Range(G⁻¹Aᵀ)`.
    RangeProjected,
    Custom(Vec<T>),
}

impl<T: Scalar> InitialPoint<T> {
    pub fn label(&self) -> &'static str {
        match self {
            InitialPoint::Thousands => "paper",
            InitialPoint::Zero => "zero",
            InitialPoint::RangeProjected => "range",
            InitialPoint::Custom(_) => "custom",
        }
    }

    pub fn resolve(&self, system: &LinearSystem<T>) -> Result<Vec<T>> {
        let n = system.n();
        match self {
            InitialPoint::Thousands => Ok(vec![T::of(1000.0); n]),
            InitialPoint::Zero => Ok(vec![T::zero(); n]),
            InitialPoint::RangeProjected => range_projection(system, &vec![T::of(1000.0); n]),
            InitialPoint::Custom(v) => {
                crate::error::check_len(n, v.len())?;
                Ok(v.clone())
            }
        }
    }
}

/// G-orthogonal projection of `v` onto `Range(G⁻¹Aᵀ)`:
/// `G^{-1/2} N N† G^{1/2} v` with `N = G^{-1/2} AᵀA G^{-1/2}`.
pub fn range_projection<T: Scalar>(system: &LinearSystem<T>, v: &[T]) -> Result<Vec<T>> {
    let g = system.g_metric();
    let gram = system.a().gram();
    let (n_mat, half, inv_half) = if g.is_identity() {
        (gram, None, None)
    } else {
        let ih = g.inv_sqrt();
        (ih.matmul(&gram).matmul(&ih).symmetrized(), Some(g.sqrt()), Some(ih))
    };
    let proj = n_mat.matmul(&pinv_psd(&n_mat, T::rank_tol())?);
    let w = match &half {
        Some(h) => h.matvec(v),
        None => v.to_vec(),
    };
    let pw = proj.matvec(&w);
    Ok(match &inv_half {
        Some(ih) => ih.matvec(&pw),
        None => pw,
    })
}

/// What the trace's `f_value` column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FValueMode {
    /// Loss at the index selected at that iteration.
    SelectedIndex,
    /// Exact expectation of the loss under the sampling rule.
    RuleExpectation,
}

impl FValueMode {
    pub fn label(&self) -> &'static str {
        match self {
            FValueMode::SelectedIndex => "f_selected",
            FValueMode::RuleExpectation => "f_rule_expectation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub omega: T,
    pub gamma: T,
    pub max_iters: usize,
    pub tol: T,
    pub seed: u64,
    pub stream: u64,
    pub x0: InitialPoint<T>,
    pub track_cesaro: bool,
    /// Residual check period; `None` picks 100 for vector sketches, else 1.
    pub check_every: Option<usize>,
    pub f_mode: FValueMode,
    /// Keep the iterate at every check point.
    pub record_iterates: bool,
    /// Keep `(index, loss)` of every step.
    pub record_steps: bool,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            omega: T::one(),
            gamma: T::zero(),
            max_iters: 1_000_000,
            tol: T::of(1e-10),
            seed: 0,
            stream: 0,
            x0: InitialPoint::Thousands,
            track_cesaro: false,
            check_every: None,
            f_mode: FValueMode::SelectedIndex,
            record_iterates: false,
            record_steps: false,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        validate_omega(self.omega)?;
        if !(self.gamma >= T::zero()) || !self.gamma.is_finite() {
            return Err(Error::InvalidConfig(format!("momentum gamma = {} must be >= 0", self.gamma)));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidConfig(format!("tolerance {} must be > 0", self.tol)));
        }
        if self.check_every == Some(0) {
            return Err(Error::InvalidConfig("check_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    /// The system's stored solution.
    Stored,
    /// `x₀ + A†(b - Ax₀)`.
    PseudoInverse,
    /// Too large to compute; relative errors are NaN.
    Unavailable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<T> {
    pub k: usize,
    pub residual: T,
    /// `‖x_k - x*‖_B / ‖x₀ - x*‖_B`
    pub rel_error: T,
    pub index: Option<usize>,
    pub f_value: Option<T>,
    /// Seconds since the iteration loop started.
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace<T> {
    pub method: &'static str,
    pub f_label: &'static str,
    pub records: Vec<IterationRecord<T>>,
    /// `(index, loss before the update)` per step, when requested.
    pub steps: Vec<(usize, T)>,
    /// Iterates at the check points, when requested.
    pub iterates: Vec<Vec<T>>,
    /// `(k, f(x̃_k))` at the check points, when tracked.
    pub cesaro: Vec<(usize, T)>,
    pub cesaro_x: Option<Vec<T>>,
    pub iterations: usize,
    pub converged: bool,
    pub final_x: Vec<T>,
    pub reference: ReferenceKind,
    /// Set when the reference was computed and `A` has deficient column rank.
    pub rank_deficient: Option<bool>,
}

impl<T: Scalar> IterationTrace<T> {
    pub fn final_residual(&self) -> T {
        self.records.last().map_or_else(T::nan, |r| r.residual)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError<T: Scalar> {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("iterate diverged at iteration {}", trace.iterations)]
    Diverged { trace: Box<IterationTrace<T>> },
}

pub type SolveResult<T> = std::result::Result<IterationTrace<T>, SolveError<T>>;

struct Reference<T> {
    x_star: Option<Vec<T>>,
    kind: ReferenceKind,
    rank_deficient: Option<bool>,
    initial_error: T,
}

fn reference_solution<T: Scalar>(system: &LinearSystem<T>, x0: &[T]) -> Result<Reference<T>> {
    let (x_star, kind, rank_deficient) = if let Some(xs) = system.x_star() {
        (Some(xs.to_vec()), ReferenceKind::Stored, None)
    } else if system.n() > PINV_REFERENCE_LIMIT {
        (None, ReferenceKind::Unavailable, None)
    } else {
        let gram = system.a().gram();
        let eig = sym_eig(&gram)?;
        let cutoff = T::rank_tol() * eig.max();
        let deficient = eig.values.iter().any(|v| *v <= cutoff);
        let pinv = eig.reconstruct_with(|v| if v > cutoff { v.recip() } else { T::zero() });
        let r: Vec<T> = system.residual(x0).iter().map(|v| -*v).collect();
        let mut xs = pinv.matvec(&system.a().t_matvec(&r));
        for (xi, x0i) in xs.iter_mut().zip(x0) {
            *xi += *x0i;
        }
        (Some(xs), ReferenceKind::PseudoInverse, Some(deficient))
    };
    let initial_error = x_star
        .as_ref()
        .map_or_else(T::nan, |xs| system.b_metric().norm_sq(&sub(x0, xs)).max(T::zero()).sqrt());
    Ok(Reference {
        x_star,
        kind,
        rank_deficient,
        initial_error,
    })
}

impl<T: Scalar> Reference<T> {
    fn rel_error(&self, system: &LinearSystem<T>, x: &[T]) -> T {
        match &self.x_star {
            None => T::nan(),
            Some(xs) => {
                let e = system.b_metric().norm_sq(&sub(x, xs)).max(T::zero()).sqrt();
                if self.initial_error.is_zero() {
                    if e.is_zero() {
                        T::zero()
                    } else {
                        T::infinity()
                    }
                } else {
                    e / self.initial_error
                }
            }
        }
    }
}

/// Outcome of one stochastic step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo<T> {
    pub index: usize,
    /// Loss at the selected index before the update.
    pub loss: T,
    /// Zero losses among the evaluated ones.
    pub zero_count: usize,
    /// Whether the step length was undefined (zero loss).
    pub skipped: bool,
}

/// State of the heavy-ball iteration `x⁺ = x - ωα∇ + γ(x - x_prev)`.
///
/// The first step uses `x_prev = x₀`. With `γ = 0` the momentum term is
/// never formed, so the arithmetic is that of plain stochastic descent.
pub struct SsdmState<'f, 'a, T> {
    family: &'f SketchFamily<'a, T>,
    rule: SamplingRule,
    omega: T,
    gamma: T,
    x: Vec<T>,
    x_prev: Vec<T>,
    rng: SsdRng,
    k: usize,
}

impl<'f, 'a, T: Scalar> SsdmState<'f, 'a, T> {
    pub fn new(family: &'f SketchFamily<'a, T>, rule: SamplingRule, omega: T, gamma: T, x0: Vec<T>, rng: SsdRng) -> Result<Self> {
        validate_omega(omega)?;
        crate::error::check_len(family.system().n(), x0.len())?;
        let rule = rule.normalized(family.q())?;
        Ok(Self {
            family,
            rule,
            omega,
            gamma,
            x_prev: x0.clone(),
            x: x0,
            rng,
            k: 0,
        })
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn x_prev(&self) -> &[T] {
        &self.x_prev
    }

    pub fn iterations(&self) -> usize {
        self.k
    }

    /// One step; `None` when every loss of the family is zero.
    pub fn step(&mut self) -> Result<Option<StepInfo<T>>> {
        let Some(sel) = select(&self.rule, self.family, &self.x, &mut self.rng)? else {
            return Ok(None);
        };
        let eval = self.family.eval(sel.index, &self.x)?;
        let mut next = self.x.clone();
        if let Some(step) = eval.step {
            axpy(-(self.omega * step), &eval.direction, &mut next);
        }
        if !self.gamma.is_zero() {
            for ((nx, x), xp) in next.iter_mut().zip(&self.x).zip(&self.x_prev) {
                *nx += self.gamma * (*x - *xp);
            }
        }
        self.x_prev = std::mem::replace(&mut self.x, next);
        self.k += 1;
        Ok(Some(StepInfo {
            index: sel.index,
            loss: eval.loss,
            zero_count: sel.state.zero_count,
            skipped: eval.step.is_none(),
        }))
    }
}

fn diverged<T: Scalar>(x: &[T]) -> bool {
    x.iter().any(|v| !v.is_finite()) || norm(x) > T::of(DIVERGENCE_NORM)
}

struct Recorder<'s, T> {
    system: &'s LinearSystem<T>,
    reference: Reference<T>,
    trace: IterationTrace<T>,
    record_iterates: bool,
    start: Instant,
}

impl<'s, T: Scalar> Recorder<'s, T> {
    fn new(system: &'s LinearSystem<T>, x0: &[T], method: &'static str, f_mode: FValueMode, record_iterates: bool) -> Result<Self> {
        let reference = reference_solution(system, x0)?;
        let trace = IterationTrace {
            method,
            f_label: f_mode.label(),
            records: Vec::new(),
            steps: Vec::new(),
            iterates: Vec::new(),
            cesaro: Vec::new(),
            cesaro_x: None,
            iterations: 0,
            converged: false,
            final_x: x0.to_vec(),
            reference: reference.kind,
            rank_deficient: reference.rank_deficient,
        };
        Ok(Self {
            system,
            reference,
            trace,
            record_iterates,
            start: Instant::now(),
        })
    }

    /// Records `x_k`; returns its residual norm.
    fn record(&mut self, k: usize, x: &[T], f_value: Option<T>) -> T {
        let residual = self.system.residual_norm(x);
        if self.trace.records.last().is_some_and(|r| r.k == k) {
            return residual;
        }
        self.trace.records.push(IterationRecord {
            k,
            residual,
            rel_error: self.reference.rel_error(self.system, x),
            index: None,
            f_value,
            elapsed: self.start.elapsed().as_secs_f64(),
        });
        if self.record_iterates {
            self.trace.iterates.push(x.to_vec());
        }
        residual
    }

    fn annotate_last(&mut self, k: usize, index: usize, f_value: Option<T>) {
        if let Some(last) = self.trace.records.last_mut() {
            if last.k == k {
                last.index = Some(index);
                if last.f_value.is_none() {
                    last.f_value = f_value;
                }
            }
        }
    }

    fn finish(mut self, iterations: usize, converged: bool, x: Vec<T>) -> IterationTrace<T> {
        self.trace.iterations = iterations;
        self.trace.converged = converged;
        self.trace.final_x = x;
        self.trace
    }
}

fn resolve_check_every<T: Scalar>(cfg: &SolverConfig<T>, vector_family: bool) -> usize {
    cfg.check_every.unwrap_or(if vector_family { 100 } else { 1 })
}

/// Stochastic steepest descent (no momentum; `cfg.gamma` is ignored).
pub fn run_ssd<T: Scalar>(family: &SketchFamily<'_, T>, rule: &SamplingRule, cfg: &SolverConfig<T>) -> SolveResult<T> {
    run_momentum(family, rule, cfg, T::zero(), "ssd")
}

/// Stochastic steepest descent with heavy-ball momentum `cfg.gamma`.
pub fn run_ssdm<T: Scalar>(family: &SketchFamily<'_, T>, rule: &SamplingRule, cfg: &SolverConfig<T>) -> SolveResult<T> {
    run_momentum(family, rule, cfg, cfg.gamma, "ssdm")
}

fn run_momentum<T: Scalar>(
    family: &SketchFamily<'_, T>,
    rule: &SamplingRule,
    cfg: &SolverConfig<T>,
    gamma: T,
    method: &'static str,
) -> SolveResult<T> {
    cfg.validate()?;
    let system = family.system();
    let x0 = cfg.x0.resolve(system)?;
    let rule = rule.normalized(family.q())?;
    let check_every = resolve_check_every(cfg, family.is_vector_family());
    let mut rec = Recorder::new(system, &x0, method, cfg.f_mode, cfg.record_iterates)?;
    let mut state = SsdmState::new(family, rule, cfg.omega, gamma, x0.clone(), stream_rng(cfg.seed, cfg.stream))?;
    let mut cesaro_sum = cfg.track_cesaro.then(|| vec![T::zero(); system.n()]);
    let expectation = |x: &[T]| -> Result<T> { expectation_over_losses(&rule, &family.losses(x)?) };

    let mut converged = false;
    loop {
        let k = state.iterations();
        let at_check = k % check_every == 0 || k == cfg.max_iters;
        if at_check {
            let f_value = match cfg.f_mode {
                FValueMode::RuleExpectation => Some(expectation(state.x())?),
                FValueMode::SelectedIndex => None,
            };
            let residual = rec.record(k, state.x(), f_value);
            if k > 0 {
                if let Some(sum) = &cesaro_sum {
                    let avg: Vec<T> = sum.iter().map(|s| *s / T::of(k as f64)).collect();
                    rec.trace.cesaro.push((k, expectation(&avg)?));
                }
            }
            if residual <= cfg.tol {
                converged = true;
                break;
            }
        }
        if k >= cfg.max_iters {
            break;
        }
        if let Some(sum) = cesaro_sum.as_mut() {
            axpy(T::one(), state.x(), sum);
        }
        let Some(info) = state.step()? else {
            // every loss is zero: no further progress is possible
            let residual = rec.record(k, state.x(), None);
            converged = residual <= cfg.tol;
            break;
        };
        if at_check {
            rec.annotate_last(k, info.index, Some(info.loss));
        }
        if cfg.record_steps {
            rec.trace.steps.push((info.index, info.loss));
        }
        if diverged(state.x()) {
            let k = state.iterations();
            rec.record(k, state.x(), None);
            debug!("{method} diverged at iteration {k}");
            let x = state.x().to_vec();
            return Err(SolveError::Diverged {
                trace: Box::new(rec.finish(k, false, x)),
            });
        }
    }
    if let Some(sum) = cesaro_sum {
        let k = state.iterations().max(1);
        rec.trace.cesaro_x = Some(sum.iter().map(|s| *s / T::of(k as f64)).collect());
    }
    let k = state.iterations();
    let x = state.x().to_vec();
    Ok(rec.finish(k, converged, x))
}

fn spd_factor_of<T: Scalar>(system: &LinearSystem<T>) -> Result<()> {
    if !system.a().is_square() || !system.is_symmetric() {
        return Err(Error::InvalidInput("method needs a square symmetric positive definite A".into()));
    }
    SpdFactor::new(system.a().clone()).map(|_| ())
}

/// Steepest descent on SPD `A`: `x⁺ = x - ω (rᵀr / rᵀAr) r`, `r = Ax - b`.
pub fn run_sd<T: Scalar>(system: &LinearSystem<T>, cfg: &SolverConfig<T>) -> SolveResult<T> {
    cfg.validate()?;
    spd_factor_of(system)?;
    let a = system.a();
    let mut x = cfg.x0.resolve(system)?;
    let check_every = resolve_check_every(cfg, false);
    let mut rec = Recorder::new(system, &x, "sd", FValueMode::SelectedIndex, cfg.record_iterates)?;
    let mut k = 0;
    let mut converged = false;
    loop {
        let r = system.residual(&x);
        let r_sq = norm_sq(&r);
        let loss = T::of(0.5) * r_sq;
        if k % check_every == 0 || k == cfg.max_iters {
            let residual = rec.record(k, &x, None);
            if residual <= cfg.tol {
                converged = true;
                break;
            }
        }
        if k >= cfg.max_iters {
            break;
        }
        let ar = a.matvec(&r);
        let curvature = dot(&r, &ar);
        if !(curvature > T::zero()) {
            let residual = rec.record(k, &x, None);
            converged = residual <= cfg.tol;
            break;
        }
        rec.annotate_last(k, 0, Some(loss));
        let step = r_sq / curvature;
        axpy(-(cfg.omega * step), &r, &mut x);
        k += 1;
        if cfg.record_steps {
            rec.trace.steps.push((0, loss));
        }
        if diverged(&x) {
            rec.record(k, &x, None);
            return Err(SolveError::Diverged {
                trace: Box::new(rec.finish(k, false, x)),
            });
        }
    }
    Ok(rec.finish(k, converged, x))
}

/// Conjugate gradients as steepest descent with adaptive momentum:
/// `x_{k+1} = x_k + α_k u_k + (α_k β_{k-1} / α_{k-1}) (x_k - x_{k-1})`
/// with `u_k` the recursively updated residual `b - Ax_k`. The momentum
/// term is carried as the scaled difference `(x_k - x_{k-1}) / α_{k-1}`.
pub fn run_cg_momentum<T: Scalar>(system: &LinearSystem<T>, cfg: &SolverConfig<T>) -> SolveResult<T> {
    cfg.validate()?;
    spd_factor_of(system)?;
    let a = system.a();
    let mut x = cfg.x0.resolve(system)?;
    // (x_k - x_{k-1}) / α_{k-1}, the previous search direction
    let mut direction = vec![T::zero(); x.len()];
    let mut u: Vec<T> = system.residual(&x).iter().map(|v| -*v).collect();
    let mut beta = T::zero();
    let check_every = resolve_check_every(cfg, false);
    let mut rec = Recorder::new(system, &x, "cg", FValueMode::SelectedIndex, cfg.record_iterates)?;
    let mut k = 0;
    let mut converged = false;
    loop {
        if k % check_every == 0 || k == cfg.max_iters {
            let residual = rec.record(k, &x, None);
            if residual <= cfg.tol {
                converged = true;
                break;
            }
        }
        if k >= cfg.max_iters {
            break;
        }
        let u_sq = norm_sq(&u);
        // x_{k+1} = x_k + α_k u_k + (α_k β_{k-1} / α_{k-1}) (x_k - x_{k-1})
        //         = x_k + α_k (u_k + β_{k-1} d_{k-1})
        let mut p = u.clone();
        if k > 0 {
            axpy(beta, &direction, &mut p);
        }
        let ap = a.matvec(&p);
        let curvature = dot(&p, &ap);
        if u_sq.is_zero() || !(curvature > T::zero()) {
            let residual = rec.record(k, &x, None);
            converged = residual <= cfg.tol;
            break;
        }
        let alpha = u_sq / curvature;
        rec.annotate_last(k, 0, Some(T::of(0.5) * u_sq));
        axpy(alpha, &p, &mut x);
        direction = p;
        axpy(-alpha, &ap, &mut u);
        beta = norm_sq(&u) / u_sq;
        k += 1;
        if cfg.record_steps {
            rec.trace.steps.push((0, T::of(0.5) * u_sq));
        }
        if diverged(&x) {
            rec.record(k, &x, None);
            return Err(SolveError::Diverged {
                trace: Box::new(rec.finish(k, false, x)),
            });
        }
    }
    Ok(rec.finish(k, converged, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::problem::{gen_gaussian, GenSpec, Metric};
    use crate::sampling::SamplingRule;
    use crate::sketch::SketchKind;

    fn sys(rows: &[&[f64]], b: &[f64]) -> LinearSystem<f64> {
        let a = DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        LinearSystem::new(a, b.to_vec()).unwrap()
    }

    #[test]
    fn single_row_converges_in_one_step() {
        let s = sys(&[&[1.0, 2.0, -1.0]], &[3.0]);
        let fam = SketchFamily::new(&s, SketchKind::Row).unwrap();
        let cfg = SolverConfig {
            check_every: Some(1),
            ..Default::default()
        };
        let t = run_ssd(&fam, &SamplingRule::Uniform, &cfg).unwrap();
        assert!(t.converged);
        assert_eq!(t.iterations, 1);
    }

    #[test]
    fn identity_with_max_distance_needs_at_most_n_steps() {
        let n = 6;
        let x_star: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let s = LinearSystem::new(DenseMatrix::identity(n), x_star.clone()).unwrap();
        let fam = SketchFamily::new(&s, SketchKind::Row).unwrap();
        let cfg = SolverConfig {
            check_every: Some(1),
            record_steps: true,
            ..Default::default()
        };
        let t = run_ssd(&fam, &SamplingRule::MaxDistance, &cfg).unwrap();
        assert!(t.converged && t.iterations <= n);
        let mut seen: Vec<usize> = t.steps.iter().map(|s| s.0).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), t.iterations);
    }

    #[test]
    fn zero_momentum_matches_plain_descent() {
        let s = gen_gaussian::<f64>(&GenSpec::gaussian(30, 8, 3)).unwrap();
        let fam = SketchFamily::new(&s, SketchKind::Row).unwrap();
        let cfg = SolverConfig {
            max_iters: 500,
            check_every: Some(7),
            seed: 9,
            ..Default::default()
        };
        let a = run_ssd(&fam, &SamplingRule::Greedy { tau: 3 }, &cfg).unwrap();
        let b = run_ssdm(&fam, &SamplingRule::Greedy { tau: 3 }, &cfg).unwrap();
        assert_eq!(a.final_x, b.final_x);
        let strip = |t: &IterationTrace<f64>| {
            t.records
                .iter()
                .map(|r| (r.k, r.residual, r.rel_error, r.index, r.f_value))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn starting_at_solution_takes_no_steps() {
        let s = gen_gaussian::<f64>(&GenSpec::gaussian(10, 4, 1)).unwrap();
        let fam = SketchFamily::new(&s, SketchKind::Row).unwrap();
        let cfg = SolverConfig {
            gamma: 0.3,
            x0: InitialPoint::Custom(s.x_star().unwrap().to_vec()),
            ..Default::default()
        };
        let t = run_ssdm(&fam, &SamplingRule::Uniform, &cfg).unwrap();
        assert!(t.converged);
        assert_eq!(t.iterations, 0);
    }

    #[test]
    fn large_momentum_diverges_with_trace() {
        let s = gen_gaussian::<f64>(&GenSpec::gaussian(20, 5, 2)).unwrap();
        let fam = SketchFamily::new(&s, SketchKind::Row).unwrap();
        let cfg = SolverConfig {
            gamma: 3.0,
            check_every: Some(1),
            ..Default::default()
        };
        match run_ssdm(&fam, &SamplingRule::Uniform, &cfg) {
            Err(SolveError::Diverged { trace }) => assert!(!trace.records.is_empty() && !trace.converged),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let s = sys(&[&[1.0, 0.0]], &[1.0]);
        let fam = SketchFamily::new(&s, SketchKind::Row).unwrap();
        for cfg in [
            SolverConfig { omega: 2.0, ..Default::default() },
            SolverConfig { omega: 0.0, ..Default::default() },
            SolverConfig { gamma: -0.1, ..Default::default() },
            SolverConfig { tol: 0.0, ..Default::default() },
        ] {
            assert!(matches!(run_ssdm(&fam, &SamplingRule::Uniform, &cfg), Err(SolveError::Invalid(_))));
        }
    }

    #[test]
    fn steepest_descent_examples() {
        let s = sys(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, -2.0]);
        let t = run_sd(&s, &SolverConfig::default()).unwrap();
        assert!(t.converged && t.iterations == 1);

        let s = sys(&[&[1.0, 0.0], &[0.0, 2.0]], &[0.0, 0.0]);
        let cfg = SolverConfig {
            x0: InitialPoint::Custom(vec![1.0, 1.0]),
            max_iters: 1,
            record_iterates: true,
            ..Default::default()
        };
        let t = run_sd(&s, &cfg).unwrap();
        let x1 = &t.iterates[1];
        assert!((x1[0] - 4.0 / 9.0).abs() < 1e-15 && (x1[1] + 1.0 / 9.0).abs() < 1e-15);
        assert!(run_sd(&sys(&[&[1.0, 2.0], &[2.0, 1.0]], &[1.0, 1.0]), &cfg).is_err());
    }

    #[test]
    fn cg_examples() {
        let s = sys(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, -2.0]);
        let t = run_cg_momentum(&s, &SolverConfig::default()).unwrap();
        assert!(t.converged && t.iterations == 1);
        let s = sys(&[&[1.0, 0.0], &[0.0, 2.0]], &[3.0, -1.0]);
        let cfg = SolverConfig {
            tol: 1e-12,
            x0: InitialPoint::Custom(vec![5.0, 7.0]),
            ..Default::default()
        };
        let t = run_cg_momentum(&s, &cfg).unwrap();
        assert!(t.converged && t.iterations <= 2);
    }

    #[test]
    fn range_projection_is_idempotent_and_keeps_solution_set() {
        let s = sys(&[&[1.0, 1.0, 0.0]], &[2.0])
            .with_metrics(Metric::Identity, Metric::Dense(DenseMatrix::from_diag(&[1.0, 2.0, 4.0])))
            .unwrap();
        let x0 = InitialPoint::RangeProjected.resolve(&s).unwrap();
        let again = range_projection(&s, &x0).unwrap();
        for (a, b) in x0.iter().zip(&again) {
            assert!((a - b).abs() < 1e-9);
        }
        // Range(G⁻¹Aᵀ) is spanned by (1, 1/2, 0)
        assert!((x0[0] - 2.0 * x0[1]).abs() < 1e-9 && x0[2].abs() < 1e-9);
    }

    #[test]
    fn pinv_reference_flags_rank_deficiency() {
        let s = sys(&[&[1.0, 1.0], &[2.0, 2.0]], &[1.0, 2.0]);
        let fam = SketchFamily::new(&s, SketchKind::Row).unwrap();
        let t = run_ssd(&fam, &SamplingRule::Uniform, &SolverConfig { max_iters: 50, ..Default::default() }).unwrap();
        assert_eq!(t.reference, ReferenceKind::PseudoInverse);
        assert_eq!(t.rank_deficient, Some(true));
        assert!(t.converged);
        assert!(t.records.last().unwrap().rel_error < 1e-9);
    }
}
