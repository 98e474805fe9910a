//! Spectral constants of a sketch family, predicted convergence rates and
//! randomized checks of the inequalities those rates rest on.
//!
//! Everything is expressed through the whitened operators
//! `T_i = G^{-1/2} Z_i G^{-1/2}` and their sum `𝐓 = Σ T_i`. With
//! `r = G^{1/2}(x - x*)` the loss is `f_i(x) = ½ rᵀT_i r`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{pinv_psd, sym_eig, DenseMatrix, SymEigen};
use crate::rng::Gaussian;
use crate::sampling::{expectation_over_losses, greedy_select, gs_expectation_weights, CappedRule, SamplingRule, ThresholdMode};
use crate::scalar::Scalar;
use crate::sketch::{validate_omega, SketchFamily};

/// Largest `n` accepted by the dense spectral computations.
pub const MAX_THEORY_DIM: usize = 500;
/// Eigenvalues at or below this fraction of the largest one count as zero.
pub const SPECTRAL_RANK_TOL: f64 = 1e-10;
/// Relative slack of the inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Largest family size for which greedy expectations are also enumerated.
pub const ENUMERATION_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexSpectrum {
    /// `λ_min(T_i)`, clamped at zero.
    pub mu1: f64,
    /// Smallest positive eigenvalue of `T_i`.
    pub mu1_plus: f64,
    /// `λ_max(T_i)`
    pub mu2: f64,
    /// `μ₂(i) / μ₁⁺(i)`
    pub sigma: f64,
    pub positive_definite: bool,
    /// `T_i = 0` (the sketch never moves the iterate).
    pub vanishing: bool,
}

/// The four constants that enter every rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConstants {
    pub mu1_plus: f64,
    pub mu2: f64,
    pub lambda1_plus: f64,
    pub lambda2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub family: String,
    pub rule: SamplingRule,
    pub q: usize,
    pub n: usize,
    pub s_k: usize,
    pub indices: Vec<IndexSpectrum>,
    pub constants: SpectralConstants,
    /// `λ_min⁺(𝐓)` and `λ_max(𝐓)`
    pub t_sum_min_plus: f64,
    pub t_sum_max: f64,
    pub all_positive_definite: bool,
}

fn spectrum_of(eig: &SymEigen<f64>) -> IndexSpectrum {
    let top = eig.max().max(0.0);
    if top <= 0.0 {
        return IndexSpectrum {
            mu1: 0.0,
            mu1_plus: 0.0,
            mu2: 0.0,
            sigma: f64::NAN,
            positive_definite: false,
            vanishing: true,
        };
    }
    let cutoff = SPECTRAL_RANK_TOL * top;
    let mu1_plus = eig.min_positive(SPECTRAL_RANK_TOL);
    let positive_definite = eig.min() > cutoff;
    IndexSpectrum {
        mu1: if positive_definite { eig.min() } else { 0.0 },
        mu1_plus,
        mu2: top,
        sigma: top / mu1_plus,
        positive_definite,
        vanishing: false,
    }
}

/// `rᵀT^k r` for `k = 1, 2, 3` from the eigenpairs of `T`, dropping the
/// numerically null part; every term is nonnegative, so no cancellation.
fn spectral_moments(eig: &SymEigen<f64>, r: &[f64]) -> [f64; 3] {
    let cutoff = SPECTRAL_RANK_TOL * eig.max().max(0.0);
    let coords = eig.vectors.t_matvec(r);
    let mut m = [0.0; 3];
    for (lambda, c) in eig.values.iter().zip(&coords) {
        if *lambda > cutoff {
            let w = c * c;
            m[0] += lambda * w;
            m[1] += lambda * lambda * w;
            m[2] += lambda * lambda * lambda * w;
        }
    }
    m
}

/// `q̄(τ) = max{q - s_k, q - τ + 1}`
pub fn q_bar(q: usize, tau: usize, s_k: usize) -> usize {
    (q.saturating_sub(s_k)).max(q + 1 - tau)
}

/// `(λ₁⁺, λ₂)` of a rule.
pub fn rule_constants(rule: &SamplingRule, q: usize, s_k: usize, t_sum_min_plus: f64, t_sum_max: f64, mu2: f64) -> Result<(f64, f64)> {
    let rule = rule.normalized(q)?;
    if let Some(tau) = rule.greedy_tau(q) {
        let l1 = t_sum_min_plus / q_bar(q, tau, s_k) as f64;
        let l2 = mu2.min(tau as f64 * t_sum_max / q as f64);
        return Ok((l1, l2));
    }
    let SamplingRule::Capped(CappedRule {
        theta,
        tau1,
        tau2,
        threshold,
        ..
    }) = rule
    else {
        unreachable!("non-greedy rules are capped");
    };
    // the lower-bound threshold is the mean loss, i.e. τ₁ = τ₂ = 1
    let (tau1, tau2) = match threshold {
        ThresholdMode::Exact => (tau1, tau2),
        ThresholdMode::LowerBound => (1, 1),
    };
    let l1 = theta * t_sum_min_plus / q_bar(q, tau1, s_k) as f64
        + (1.0 - theta) * t_sum_min_plus / q_bar(q, tau2, s_k) as f64;
    Ok((l1, mu2))
}

/// Whitened operators `T_i` of every index, in `f64`.
pub fn whitened_operators<T: Scalar>(family: &SketchFamily<'_, T>) -> Result<Vec<DenseMatrix<f64>>> {
    let n = family.system().n();
    if n > MAX_THEORY_DIM {
        return Err(Error::SizeLimit(format!(
            "spectral computations need n <= {MAX_THEORY_DIM}, got {n}"
        )));
    }
    let g_inv_sqrt: DenseMatrix<f64> = family.system().g_metric().inv_sqrt().cast();
    (0..family.q())
        .map(|i| {
            let z: DenseMatrix<f64> = family.z_matrix(i)?.cast();
            Ok(g_inv_sqrt.matmul(&z).matmul(&g_inv_sqrt).symmetrized())
        })
        .collect()
}

fn sum_spectrum(ts: &[DenseMatrix<f64>], n: usize) -> Result<(f64, f64)> {
    let mut sum = DenseMatrix::zeros(n, n);
    for t in ts {
        sum = sum.add(t);
    }
    let eig = sym_eig(&sum)?;
    Ok((eig.min_positive(SPECTRAL_RANK_TOL), eig.max()))
}

pub fn spectral_report<T: Scalar>(family: &SketchFamily<'_, T>, rule: &SamplingRule, s_k: usize) -> Result<SpectralReport> {
    let ts = whitened_operators(family)?;
    let n = family.system().n();
    let q = family.q();
    let indices: Vec<IndexSpectrum> = ts
        .iter()
        .map(|t| sym_eig(t).map(|e| spectrum_of(&e)))
        .collect::<Result<_>>()?;
    let live: Vec<&IndexSpectrum> = indices.iter().filter(|s| !s.vanishing).collect();
    if live.is_empty() {
        return Err(Error::NumericalFailure("every whitened operator vanishes".into()));
    }
    let mu1_plus = live.iter().map(|s| s.mu1_plus).fold(f64::INFINITY, f64::min);
    let mu2 = live.iter().map(|s| s.mu2).fold(0.0, f64::max);
    let (t_sum_min_plus, t_sum_max) = sum_spectrum(&ts, n)?;
    let (lambda1_plus, lambda2) = rule_constants(rule, q, s_k, t_sum_min_plus, t_sum_max, mu2)?;
    Ok(SpectralReport {
        family: family.kind().label(),
        rule: rule.normalized(q)?,
        q,
        n,
        s_k,
        all_positive_definite: indices.iter().all(|s| s.positive_definite),
        indices,
        constants: SpectralConstants {
            mu1_plus,
            mu2,
            lambda1_plus,
            lambda2,
        },
        t_sum_min_plus,
        t_sum_max,
    })
}

impl SpectralReport {
    /// `key=value` lines, suitable for benchmark metadata.
    pub fn to_key_values(&self) -> String {
        let c = &self.constants;
        let mut out = String::new();
        let _ = writeln!(out, "family={}", self.family);
        let _ = writeln!(out, "rule={}", self.rule.label());
        let _ = writeln!(out, "q={}", self.q);
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "s_k={}", self.s_k);
        let _ = writeln!(out, "mu1_plus={:e}", c.mu1_plus);
        let _ = writeln!(out, "mu2={:e}", c.mu2);
        let _ = writeln!(out, "lambda1_plus={:e}", c.lambda1_plus);
        let _ = writeln!(out, "lambda2={:e}", c.lambda2);
        let _ = writeln!(out, "t_sum_min_plus={:e}", self.t_sum_min_plus);
        let _ = writeln!(out, "t_sum_max={:e}", self.t_sum_max);
        let _ = writeln!(out, "all_positive_definite={}", self.all_positive_definite);
        out
    }

    fn live_sigmas(&self) -> Vec<f64> {
        self.indices.iter().filter(|s| !s.vanishing).map(|s| s.sigma).collect()
    }
}

/// A rate under the uniform-over-indices surrogate, with the extremes
/// attained by the best and worst single index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBracket {
    pub uniform: f64,
    pub best: f64,
    pub worst: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedRates {
    pub omega: f64,
    /// `1 - (2ω - ω²) λ₁⁺ / μ₂`
    pub psd_factor: f64,
    /// `1 - (2ω - ω²) E[4σ/(1+σ)²]`, when every `T_i ≻ 0`.
    pub pd_factor: Option<RateBracket>,
    /// `1 - 4(2ω - ω²) / min{4E[σ], 4 + E[σ²]}`
    pub function_decay: RateBracket,
    /// `E[f(x̃_k)] ≤ f_cesaro_coefficient · ‖x₀ - x*‖²_G / k`
    pub f_cesaro_coefficient: f64,
    /// `E‖x̃_k - x*‖²_G ≤ x_cesaro_coefficient · ‖x₀ - x*‖²_G / k`
    pub x_cesaro_coefficient: f64,
}

fn omega_gain(omega: f64) -> f64 {
    2.0 * omega - omega * omega
}

fn bracket(values: &[f64], uniform: f64, rate: impl Fn(f64) -> f64) -> RateBracket {
    let per_index: Vec<f64> = values.iter().map(|v| rate(*v)).collect();
    RateBracket {
        uniform,
        best: per_index.iter().copied().fold(f64::INFINITY, f64::min),
        worst: per_index.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

pub fn predicted_rates(report: &SpectralReport, omega: f64) -> Result<PredictedRates> {
    validate_omega(omega)?;
    let gain = omega_gain(omega);
    let c = &report.constants;
    let sigmas = report.live_sigmas();
    let mean = |f: &dyn Fn(f64) -> f64| sigmas.iter().map(|s| f(*s)).sum::<f64>() / sigmas.len() as f64;

    let pd_factor = report.all_positive_definite.then(|| {
        let kantorovich = |s: f64| 4.0 * s / ((1.0 + s) * (1.0 + s));
        bracket(&sigmas, 1.0 - gain * mean(&kantorovich), |s| 1.0 - gain * kantorovich(s))
    });
    let decay = |e_sigma: f64, e_sigma_sq: f64| 1.0 - 4.0 * gain / (4.0 * e_sigma).min(4.0 + e_sigma_sq);
    let function_decay = bracket(&sigmas, decay(mean(&|s| s), mean(&|s| s * s)), |s| decay(s, s * s));

    Ok(PredictedRates {
        omega,
        psd_factor: 1.0 - gain * c.lambda1_plus / c.mu2,
        pd_factor,
        function_decay,
        f_cesaro_coefficient: c.mu2 / (2.0 * omega * (2.0 - omega)),
        x_cesaro_coefficient: c.mu2 / (omega * c.lambda1_plus * (2.0 - omega)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumRateParams {
    pub zeta: f64,
    pub xi: f64,
    pub gamma: f64,
    pub omega: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub delta: f64,
    pub rho: f64,
    /// `φ₁ + φ₂ < 1`
    pub admissible: bool,
}

impl MomentumRateParams {
    /// `V = ‖r_k‖² + δ‖r_{k-1}‖² + (2ζω/μ₂) f(x_{k-1})`
    pub fn lyapunov(&self, constants: &SpectralConstants, r_sq: f64, r_prev_sq: f64, f_prev: f64) -> f64 {
        r_sq + self.delta * r_prev_sq + 2.0 * self.zeta * self.omega / constants.mu2 * f_prev
    }
}

/// Heavy-ball rate constants. `ζ = ξ = 0` is handled as the limit in which
/// the `ξμ₂/(ζμ₁⁺)` branch disappears.
pub fn momentum_rate(constants: &SpectralConstants, zeta: f64, xi: f64, gamma: f64, omega: f64) -> Result<MomentumRateParams> {
    validate_omega(omega)?;
    let SpectralConstants {
        mu1_plus,
        mu2,
        lambda1_plus,
        lambda2,
    } = *constants;
    if zeta < 0.0 || xi < 0.0 {
        return Err(Error::InvalidConfig(format!("need zeta, xi >= 0, got zeta = {zeta}, xi = {xi}")));
    }
    if gamma < xi.max(zeta - 2.0 + omega) {
        return Err(Error::InvalidConfig(format!(
            "need gamma >= max(xi, zeta - 2 + omega), got gamma = {gamma}"
        )));
    }
    let limit_branch = zeta == 0.0 && xi == 0.0;
    let ratio = if limit_branch { 0.0 } else { xi * mu2 / (zeta * mu1_plus) };
    if !limit_branch && !(ratio < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "need 0 <= xi < zeta mu1_plus / mu2, got xi mu2 / (zeta mu1_plus) = {ratio}"
        )));
    }
    let phi1 = 1.0 + 3.0 * gamma + 2.0 * gamma * gamma - (gamma + 2.0 - omega - zeta) * omega / mu2 * lambda1_plus;
    let phi2 = gamma + 2.0 * gamma * gamma + (gamma - xi) * omega / mu1_plus * lambda2;
    let root = (phi1 * phi1 + 4.0 * phi2).sqrt();
    let quadratic = (phi1 + root) / 2.0;
    let (rho, delta) = if limit_branch {
        (quadratic, 0.0f64.max((root - phi1) / 2.0))
    } else {
        (ratio.max(quadratic), 0.0f64.max(ratio - phi1).max((root - phi1) / 2.0))
    };
    let admissible = phi1 + phi2 < 1.0;
    if admissible {
        let slack = 1e-12 * (1.0 + rho.abs());
        if !(phi1 + phi2 <= rho + slack && rho < 1.0) {
            return Err(Error::NumericalFailure(format!(
                "momentum rate violates phi1 + phi2 <= rho < 1: phi1 = {phi1}, phi2 = {phi2}, rho = {rho}"
            )));
        }
    }
    Ok(MomentumRateParams {
        zeta,
        xi,
        gamma,
        omega,
        phi1,
        phi2,
        delta,
        rho,
        admissible,
    })
}

/// Largest `γ` with `φ₁ + φ₂ ≤ 1`: the positive root of
/// `4γ² + γ(4 - ωλ₁⁺/μ₂ + ωλ₂/μ₁⁺) - (2 - ω - ζ)ωλ₁⁺/μ₂ - ξωλ₂/μ₁⁺ = 0`.
pub fn momentum_gamma_bound(constants: &SpectralConstants, zeta: f64, xi: f64, omega: f64) -> f64 {
    let l1 = omega * constants.lambda1_plus / constants.mu2;
    let l2 = omega * constants.lambda2 / constants.mu1_plus;
    let c = 4.0 - l1 + l2;
    let disc = c * c + 16.0 * xi * l2 + 16.0 * (2.0 - omega - zeta) * l1;
    (-c + disc.sqrt()) / 8.0
}

/// Bound on `E[f(x̃_k)]` for the Cesàro average of the heavy-ball iterates.
pub fn cesaro_bound(constants: &SpectralConstants, gamma: f64, omega: f64, k: usize, x0_error_g_sq: f64, f_x0: f64) -> Result<f64> {
    validate_omega(omega)?;
    let SpectralConstants { mu1_plus, mu2, .. } = *constants;
    let lhs = omega / mu2 + gamma * (1.0 + mu2 / mu1_plus);
    if !(lhs < 2.0) || gamma < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "need omega / mu2 + gamma (1 + mu2 / mu1_plus) < 2, got {lhs}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidConfig("Cesàro bound needs k >= 1".into()));
    }
    let denom = 2.0
        * omega
        * k as f64
        * (2.0 * mu1_plus * mu2 - gamma * mu1_plus * mu2 - gamma * mu2 * mu2 - omega * mu1_plus);
    if !(denom > 0.0) {
        return Err(Error::NumericalFailure(format!("Cesàro denominator {denom} is not positive")));
    }
    let numer = mu1_plus * mu2 * (1.0 - gamma).powi(2) * x0_error_g_sq + 2.0 * gamma * omega * mu2 * f_x0;
    Ok(numer / denom)
}

/// Outcome of one family of randomized inequality checks.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub checked: usize,
    /// Cases skipped because a denominator vanished numerically.
    pub skipped: usize,
    pub failures: usize,
    /// Largest `(lhs - rhs) / scale` seen.
    pub worst_excess: f64,
    pub first_counterexample: Option<String>,
    /// `false` for a bound that is known to fail on some inputs; it is still
    /// measured but does not count towards [`InequalityReport::passed`].
    pub holds_in_general: bool,
}

impl InequalityCheck {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            holds_in_general: true,
            checked: 0,
            skipped: 0,
            failures: 0,
            worst_excess: f64::NEG_INFINITY,
            first_counterexample: None,
        }
    }

    /// Records `lhs ≤ rhs` up to `tol · max(|lhs|, |rhs|, floor)`.
    fn le(&mut self, lhs: f64, rhs: f64, floor: f64, context: impl FnOnce() -> String) {
        self.checked += 1;
        let scale = lhs.abs().max(rhs.abs()).max(floor);
        let excess = (lhs - rhs) / scale;
        self.worst_excess = self.worst_excess.max(excess);
        if !(excess <= INEQUALITY_TOL) {
            self.failures += 1;
            if self.first_counterexample.is_none() {
                self.first_counterexample = Some(format!("{} (lhs {lhs:e} > rhs {rhs:e})", context()));
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.holds_in_general).all(InequalityCheck::passed)
    }

    pub fn get(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn quad(t: &DenseMatrix<f64>, v: &[f64]) -> (Vec<f64>, f64) {
    let tv = t.matvec(v);
    let q = tv.iter().zip(v).map(|(a, b)| a * b).sum();
    (tv, q)
}

fn dot64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `E[max]` over all `C(q, τ)` samples by enumeration.
pub fn enumerated_greedy_expectation(values: &[f64], tau: usize) -> f64 {
    let q = values.len();
    let mut total = 0.0;
    let mut count = 0usize;
    let mut subset: Vec<usize> = (0..tau).collect();
    loop {
        let losses: Vec<f64> = subset.iter().map(|&i| values[i]).collect();
        total += values[greedy_select(&losses, &subset)];
        count += 1;
        // next combination in lexicographic order
        let mut pos = tau;
        while pos > 0 && subset[pos - 1] == q - tau + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        subset[pos - 1] += 1;
        for j in pos..tau {
            subset[j] = subset[j - 1] + 1;
        }
    }
    total / count as f64
}

/// A particular solution: the stored one, or `A†b`.
fn particular_solution<T: Scalar>(family: &SketchFamily<'_, T>) -> Result<Vec<f64>> {
    let system = family.system();
    if let Some(xs) = system.x_star() {
        return Ok(xs.iter().map(|v| v.as_f64()).collect());
    }
    let a: DenseMatrix<f64> = system.a().cast();
    let b: Vec<f64> = system.b().iter().map(|v| v.as_f64()).collect();
    Ok(pinv_psd(&a.gram(), 1e-12)?.matvec(&a.t_matvec(&b)))
}

/// Randomized checks, for `trials` vectors `r ∈ Range(G^{-1/2}Aᵀ)`, of the
/// Rayleigh-quotient sandwiches of `T_i`, `T_i²`, the step-length sandwich,
/// the Kantorovich-type ratio bounds and the greedy/capped sandwich of the
/// expected loss between `λ₁⁺‖r‖²` and `λ₂‖r‖²`.
pub fn verify_inequalities<T: Scalar>(family: &SketchFamily<'_, T>, trials: usize, rng: &mut Gaussian) -> Result<InequalityReport> {
    let system = family.system();
    let ts = whitened_operators(family)?;
    let q = family.q();
    let n = system.n();
    let m = system.m();
    let eigs = ts.iter().map(sym_eig).collect::<Result<Vec<_>>>()?;
    let spectra: Vec<IndexSpectrum> = eigs.iter().map(spectrum_of).collect();
    let live: Vec<&IndexSpectrum> = spectra.iter().filter(|s| !s.vanishing).collect();
    let mu2 = live.iter().map(|s| s.mu2).fold(0.0, f64::max);
    let mu1_plus = live.iter().map(|s| s.mu1_plus).fold(f64::INFINITY, f64::min);
    let (t_min_plus, t_max) = sum_spectrum(&ts, n)?;
    let all_pd = spectra.iter().all(|s| s.positive_definite);

    let g_inv_sqrt: DenseMatrix<f64> = system.g_metric().inv_sqrt().cast();
    let a: DenseMatrix<f64> = system.a().cast();
    let range_map = g_inv_sqrt.matmul(&a.transpose());
    let x_part = particular_solution(family)?;

    let mut c1 = InequalityCheck::new("rayleigh-t");
    let mut c2 = InequalityCheck::new("rayleigh-t2");
    let mut c4 = InequalityCheck::new("step-sandwich");
    let mut c5 = InequalityCheck::new("ratio-psd");
    // (rᵀr)(rᵀT³r) ≤ (1+σ)²/(4σ)(rᵀTr)(rᵀT²r) fails e.g. for T = diag(1, 4),
    // r = (√0.9, √0.1)
    let mut c6 = InequalityCheck::new("kantorovich-mixed");
    c6.holds_in_general = false;
    let mut c7 = InequalityCheck::new("kantorovich");
    let mut c3 = InequalityCheck::new("expected-loss-sandwich");
    let mut c_enum = InequalityCheck::new("greedy-enumeration");

    let mut rules: Vec<SamplingRule> = (1..=q).map(|tau| SamplingRule::Greedy { tau }).collect();
    if q >= 2 {
        rules.push(SamplingRule::Capped(CappedRule::new(0.5, 1, q)));
        rules.push(SamplingRule::Capped(CappedRule::new(0.5, 1, q).exact()));
        rules.push(SamplingRule::Capped(CappedRule::new(0.25, 2.min(q), q).exact()));
    }
    let rule_bounds = rules
        .iter()
        .map(|rule| rule_constants(rule, q, 0, t_min_plus, t_max, mu2))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<Vec<f64>> = (1..=q).map(|tau| gs_expectation_weights(q, tau)).collect::<Result<_>>()?;

    for trial in 0..trials {
        let y: Vec<f64> = rng.vector(m);
        let r = range_map.matvec(&y);
        let r_sq = dot64(&r, &r);
        if r_sq == 0.0 {
            continue;
        }
        let x: Vec<T> = g_inv_sqrt
            .matvec(&r)
            .iter()
            .zip(&x_part)
            .map(|(d, p)| T::of(p + d))
            .collect();
        let mut quad_t = Vec::with_capacity(q);
        for (i, ((t, sp), eig)) in ts.iter().zip(&spectra).zip(&eigs).enumerate() {
            let (tr, rt) = quad(t, &r);
            quad_t.push(rt.max(0.0));
            if sp.vanishing {
                continue;
            }
            let rt2 = dot64(&tr, &tr);
            let (_, rt3) = quad(t, &tr);
            let ctx = |label: &str| format!("trial {trial}, index {i}: {label}");
            // rounding in T_i is relative to its norm, so scale by μ₂(i)^k‖r‖²
            let floor1 = sp.mu2 * sp.mu2 * r_sq;
            let floor2 = floor1 * sp.mu2;
            c1.le(sp.mu1_plus * rt, rt2, floor1, || ctx("mu1+ rTr <= rT²r"));
            c1.le(rt2, sp.mu2 * rt, floor1, || ctx("rT²r <= mu2 rTr"));
            c2.le(sp.mu1_plus * rt2, rt3, floor2, || ctx("mu1+ rT²r <= rT³r"));
            c2.le(rt3, sp.mu2 * rt2, floor2, || ctx("rT³r <= mu2 rT²r"));

            let eval = family.eval(i, &x)?;
            if let Some(step) = eval.step {
                let step = step.as_f64();
                c4.le(1.0 / mu2, 1.0 / sp.mu2, 0.0, || ctx("1/mu2 <= 1/mu2(i)"));
                c4.le(1.0 / sp.mu2, step, 0.0, || ctx("1/mu2(i) <= alpha"));
                c4.le(step, 1.0 / sp.mu1_plus, 0.0, || ctx("alpha <= 1/mu1+(i)"));
                c4.le(1.0 / sp.mu1_plus, 1.0 / mu1_plus, 0.0, || ctx("1/mu1+(i) <= 1/mu1+"));
                if system.metrics_equal() {
                    c4.le((step - 1.0).abs(), 0.0, 1.0, || ctx("G = B gives alpha = 1"));
                }
            }

            let [rt, rt2, rt3] = spectral_moments(eig, &r);
            if rt <= 0.0 {
                c5.skipped += 1;
                continue;
            }
            let ratio = rt * rt3 / (rt2 * rt2);
            c5.le(1.0, ratio, 0.0, || ctx("1 <= ratio"));
            let middle = 1.0 + (sp.mu2 - sp.mu1).powi(2) / (4.0 * sp.mu1_plus * sp.mu1_plus);
            c5.le(ratio, middle, 0.0, || ctx("ratio <= 1 + (mu2-mu1)²/(4 mu1+²)"));
            c5.le(middle, 1.0 + sp.sigma * sp.sigma / 4.0, 0.0, || ctx("middle <= 1 + sigma²/4"));
            if all_pd {
                let kant = (1.0 + sp.sigma).powi(2) / (4.0 * sp.sigma);
                let mixed = r_sq * rt3 / (rt * rt2);
                c6.le(mixed, kant, 0.0, || ctx("(rTr)(rT³r)/((rTr)(rT²r)) <= (1+sigma)²/(4 sigma)"));
                c7.le(ratio, kant, 0.0, || ctx("ratio <= (1+sigma)²/(4 sigma)"));
            }
        }

        // losses are f_j = ½ rᵀT_j r
        let losses: Vec<f64> = quad_t.iter().map(|v| 0.5 * v).collect();
        let mut sorted = losses.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        for (rule, (l1, l2)) in rules.iter().zip(&rule_bounds) {
            let expected = match rule {
                SamplingRule::Greedy { tau } => {
                    let w = &weights[tau - 1];
                    sorted[tau - 1..].iter().zip(w).map(|(f, w)| f * w).sum::<f64>()
                }
                _ => expectation_over_losses(rule, &losses)?,
            };
            let two_f = 2.0 * expected;
            let floor = mu2 * r_sq;
            c3.le(l1 * r_sq, two_f, floor, || format!("trial {trial}, {}: lambda1+ |r|² <= 2 E f", rule.label()));
            c3.le(two_f, l2 * r_sq, floor, || format!("trial {trial}, {}: 2 E f <= lambda2 |r|²", rule.label()));
            if let (SamplingRule::Greedy { tau }, true) = (rule, q <= ENUMERATION_LIMIT) {
                let brute = enumerated_greedy_expectation(&losses, *tau);
                c_enum.le((brute - expected).abs(), 0.0, brute.abs().max(floor), || {
                    format!("trial {trial}, tau {tau}: weights vs enumeration")
                });
            }
        }
    }
    Ok(InequalityReport {
        checks: vec![c1, c2, c3, c4, c5, c6, c7, c_enum],
    })
}
