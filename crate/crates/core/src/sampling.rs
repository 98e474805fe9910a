//! Index-selection rules: uniform, greedy `G(τ)` (best of `τ` indices drawn
//! without replacement), max-distance and the greedy capped rule
//! `C(θ, τ₁, τ₂)`, plus the exact greedy expectation weights.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sketch::SketchFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// `θ E[f | G(τ₁)] + (1 - θ) E[f | G(τ₂)]` from sorted losses.
    Exact,
    /// Both expectations replaced by their lower bound, the mean loss.
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WithinDistribution {
    Uniform,
    LossProportional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CappedRule {
    pub theta: f64,
    pub tau1: usize,
    pub tau2: usize,
    pub threshold: ThresholdMode,
    pub within: WithinDistribution,
}

impl CappedRule {
    pub fn new(theta: f64, tau1: usize, tau2: usize) -> Self {
        Self {
            theta,
            tau1,
            tau2,
            threshold: ThresholdMode::LowerBound,
            within: WithinDistribution::Uniform,
        }
    }

    pub fn exact(self) -> Self {
        Self {
            threshold: ThresholdMode::Exact,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplingRule {
    Uniform,
    Greedy { tau: usize },
    MaxDistance,
    Capped(CappedRule),
}

fn check_tau(q: usize, tau: usize) -> Result<()> {
    if tau == 0 || tau > q {
        return Err(Error::InvalidConfig(format!(
            "sample size tau = {tau} must lie in 1..={q}"
        )));
    }
    Ok(())
}

impl SamplingRule {
    /// Validates the rule for a family of size `q` and maps `Greedy(1)` to
    /// `Uniform` and `Greedy(q)` to `MaxDistance`.
    pub fn normalized(self, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidConfig("empty sketch family".into()));
        }
        match self {
            SamplingRule::Greedy { tau } => {
                check_tau(q, tau)?;
                Ok(if tau == 1 {
                    SamplingRule::Uniform
                } else if tau == q {
                    SamplingRule::MaxDistance
                } else {
                    self
                })
            }
            SamplingRule::Capped(c) => {
                if !(0.0..=1.0).contains(&c.theta) {
                    return Err(Error::InvalidConfig(format!(
                        "capped theta = {} must lie in [0, 1]",
                        c.theta
                    )));
                }
                check_tau(q, c.tau1)?;
                check_tau(q, c.tau2)?;
                Ok(self)
            }
            other => Ok(other),
        }
    }

    /// Sample size when the rule is a greedy rule.
    pub fn greedy_tau(&self, q: usize) -> Option<usize> {
        match self {
            SamplingRule::Uniform => Some(1),
            SamplingRule::Greedy { tau } => Some(*tau),
            SamplingRule::MaxDistance => Some(q),
            SamplingRule::Capped(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SamplingRule::Uniform => "uniform".into(),
            SamplingRule::Greedy { tau } => format!("greedy:{tau}"),
            SamplingRule::MaxDistance => "maxdist".into(),
            SamplingRule::Capped(c) => {
                let mode = match c.threshold {
                    ThresholdMode::Exact => ",exact",
                    ThresholdMode::LowerBound => "",
                };
                format!("capped:{},{},{}{mode}", c.theta, c.tau1, c.tau2)
            }
        }
    }
}

/// `τ` distinct indices of `0..q`, uniform over all subsets, ascending.
pub fn draw_sample<R: Rng + ?Sized>(q: usize, tau: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_tau(q, tau)?;
    if tau == q {
        return Ok((0..q).collect());
    }
    let mut s = index::sample(rng, q, tau).into_vec();
    s.sort_unstable();
    Ok(s)
}

/// Sample entry with the largest loss; ties go to the smallest index.
///
/// Panics on an empty sample or mismatched lengths.
pub fn greedy_select<T: Scalar>(losses: &[T], sample: &[usize]) -> usize {
    assert!(!sample.is_empty() && losses.len() == sample.len());
    let mut best = 0;
    for k in 1..sample.len() {
        if losses[k] > losses[best] || (losses[k] == losses[best] && sample[k] < sample[best]) {
            best = k;
        }
    }
    sample[best]
}

/// Weights `w_j = C(τ-1+j, τ-1) / C(q, τ)`, `j = 0..=q-τ`, for the
/// ascending-sorted losses starting at position `τ - 1`.
///
/// Evaluated from the top weight `w_{q-τ} = τ/q` downwards so that large
/// `q` underflows only the negligible small weights.
pub fn gs_expectation_weights(q: usize, tau: usize) -> Result<Vec<f64>> {
    check_tau(q, tau)?;
    let len = q - tau + 1;
    let mut w = vec![0.0; len];
    w[len - 1] = tau as f64 / q as f64;
    for j in (0..len - 1).rev() {
        w[j] = w[j + 1] * (j + 1) as f64 / (tau + j) as f64;
    }
    Ok(w)
}

fn sorted_ascending<T: Scalar>(losses: &[T]) -> Vec<T> {
    let mut s = losses.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite losses"));
    s
}

/// `E[f_i | i ~ G(τ)]` for the given loss vector.
pub fn greedy_expectation<T: Scalar>(losses: &[T], tau: usize) -> Result<T> {
    let weights = gs_expectation_weights(losses.len(), tau)?;
    Ok(weighted_sorted(&sorted_ascending(losses), &weights, tau))
}

fn weighted_sorted<T: Scalar>(sorted: &[T], weights: &[f64], tau: usize) -> T {
    sorted[tau - 1..]
        .iter()
        .zip(weights)
        .map(|(f, w)| *f * T::of(*w))
        .sum()
}

fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::of(v.len() as f64)
}

/// Selection threshold of the capped rule.
pub fn capped_threshold<T: Scalar>(all_losses: &[T], rule: &CappedRule) -> Result<T> {
    match rule.threshold {
        ThresholdMode::LowerBound => Ok(mean(all_losses)),
        ThresholdMode::Exact => {
            let sorted = sorted_ascending(all_losses);
            let q = all_losses.len();
            let e1 = weighted_sorted(&sorted, &gs_expectation_weights(q, rule.tau1)?, rule.tau1);
            let e2 = weighted_sorted(&sorted, &gs_expectation_weights(q, rule.tau2)?, rule.tau2);
            let theta = T::of(rule.theta);
            Ok(theta * e1 + (T::one() - theta) * e2)
        }
    }
}

/// Indices whose loss reaches the capped threshold. Always contains the
/// (smallest) argmax.
pub fn capped_set<T: Scalar>(all_losses: &[T], rule: &CappedRule) -> Result<Vec<usize>> {
    let threshold = capped_threshold(all_losses, rule)?;
    let all: Vec<usize> = (0..all_losses.len()).collect();
    let top = greedy_select(all_losses, &all);
    Ok(all
        .into_iter()
        .filter(|&i| i == top || all_losses[i] >= threshold)
        .collect())
}

fn draw_within<T: Scalar, R: Rng + ?Sized>(
    candidates: &[usize],
    all_losses: &[T],
    within: WithinDistribution,
    rng: &mut R,
) -> usize {
    match within {
        WithinDistribution::Uniform => candidates[rng.gen_range(0..candidates.len())],
        WithinDistribution::LossProportional => {
            let total: f64 = candidates.iter().map(|&i| all_losses[i].as_f64()).sum();
            let mut target = rng.gen::<f64>() * total;
            for &i in candidates {
                target -= all_losses[i].as_f64();
                if target < 0.0 {
                    return i;
                }
            }
            *candidates.last().expect("capped set is nonempty")
        }
    }
}

/// Capped-rule draw; `None` when every loss is zero (the system is solved).
pub fn capped_select<T: Scalar, R: Rng + ?Sized>(
    all_losses: &[T],
    rule: &CappedRule,
    rng: &mut R,
) -> Result<Option<usize>> {
    if all_losses.iter().all(|f| f.is_zero()) {
        return Ok(None);
    }
    let set = capped_set(all_losses, rule)?;
    Ok(Some(draw_within(&set, all_losses, rule.within, rng)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState<T> {
    /// Indices whose losses were evaluated, ascending.
    pub sample: Vec<usize>,
    /// Losses aligned with `sample`.
    pub losses: Vec<T>,
    /// Zero losses among `losses`.
    pub zero_count: usize,
    pub chosen: usize,
    /// Whether every index of the family was evaluated.
    pub exhaustive: bool,
}

impl<T: Scalar> SelectionState<T> {
    pub fn chosen_loss(&self) -> T {
        let pos = self
            .sample
            .binary_search(&self.chosen)
            .expect("chosen index was evaluated");
        self.losses[pos]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection<T> {
    pub index: usize,
    pub state: SelectionState<T>,
}

/// Picks the next sketch index. `None` means every evaluated loss over the
/// full family is zero.
pub fn select<T: Scalar, R: Rng + ?Sized>(
    rule: &SamplingRule,
    family: &SketchFamily<'_, T>,
    x: &[T],
    rng: &mut R,
) -> Result<Option<Selection<T>>> {
    let q = family.q();
    let rule = rule.normalized(q)?;
    let sample = match rule {
        SamplingRule::Uniform => vec![rng.gen_range(0..q)],
        SamplingRule::Greedy { tau } => draw_sample(q, tau, rng)?,
        SamplingRule::MaxDistance | SamplingRule::Capped(_) => (0..q).collect(),
    };
    let losses = sample
        .iter()
        .map(|&i| family.eval_loss(i, x))
        .collect::<Result<Vec<T>>>()?;
    let zero_count = losses.iter().filter(|f| f.is_zero()).count();
    let exhaustive = sample.len() == q;
    if exhaustive && zero_count == q {
        return Ok(None);
    }
    let chosen = match &rule {
        SamplingRule::Capped(c) => capped_select(&losses, c, rng)?.expect("some loss is positive"),
        _ => greedy_select(&losses, &sample),
    };
    Ok(Some(Selection {
        index: chosen,
        state: SelectionState {
            sample,
            losses,
            zero_count,
            chosen,
            exhaustive,
        },
    }))
}

/// `E[f_i(x)]` with `i` distributed as the rule at `x`.
pub fn rule_expectation<T: Scalar>(rule: &SamplingRule, family: &SketchFamily<'_, T>, x: &[T]) -> Result<T> {
    let losses = family.losses(x)?;
    expectation_over_losses(rule, &losses)
}

/// `E[f_i]` under the rule, given all `q` losses.
pub fn expectation_over_losses<T: Scalar>(rule: &SamplingRule, losses: &[T]) -> Result<T> {
    let q = losses.len();
    match rule.normalized(q)? {
        SamplingRule::Uniform => Ok(mean(losses)),
        SamplingRule::Greedy { tau } => greedy_expectation(losses, tau),
        SamplingRule::MaxDistance => Ok(losses.iter().copied().fold(T::zero(), T::max)),
        SamplingRule::Capped(c) => {
            if losses.iter().all(|f| f.is_zero()) {
                return Ok(T::zero());
            }
            let set = capped_set(losses, &c)?;
            let picked: Vec<T> = set.iter().map(|&i| losses[i]).collect();
            Ok(match c.within {
                WithinDistribution::Uniform => mean(&picked),
                WithinDistribution::LossProportional => {
                    let total: T = picked.iter().copied().sum();
                    picked.iter().map(|f| *f * *f).sum::<T>() / total
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn sample_examples() {
        let mut rng = stream_rng(1, 0);
        assert_eq!(draw_sample(5, 5, &mut rng).unwrap(), vec![0, 1, 2, 3, 4]);
        assert!(draw_sample(3, 4, &mut rng).is_err());
        assert!(draw_sample(3, 0, &mut rng).is_err());
        let s = draw_sample(10, 4, &mut rng).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn singleton_draws_pass_chi_square() {
        let mut rng = stream_rng(2, 0);
        let q = 10;
        let draws = 100_000;
        let mut counts = vec![0usize; q];
        for _ in 0..draws {
            counts[draw_sample(q, 1, &mut rng).unwrap()[0]] += 1;
        }
        let expected = draws as f64 / q as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 9 degrees of freedom, p = 0.01 critical value
        assert!(chi2 < 21.666, "chi2 = {chi2}");
    }

    #[test]
    fn pair_subsets_are_uniform() {
        let mut rng = stream_rng(3, 0);
        let draws = 60_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            *counts.entry(draw_sample(4, 2, &mut rng).unwrap()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - draws as f64 * p).abs() < 3.0 * sd);
        }
    }

    #[test]
    fn argmax_with_ties() {
        assert_eq!(greedy_select(&[0.1, 0.9, 0.3], &[2, 5, 7]), 5);
        assert_eq!(greedy_select(&[1.0, 1.0, 1.0], &[2, 5, 7]), 2);
        assert_eq!(greedy_select(&[1.0, 1.0], &[7, 3]), 3);
        assert_eq!(greedy_select(&[0.0], &[4]), 4);
    }

    #[test]
    fn weight_examples() {
        let w = gs_expectation_weights(3, 2).unwrap();
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-15 && (w[1] - 2.0 / 3.0).abs() < 1e-15);
        for wi in gs_expectation_weights(7, 1).unwrap() {
            assert!((wi - 1.0 / 7.0).abs() < 1e-15);
        }
        assert_eq!(gs_expectation_weights(7, 7).unwrap(), vec![1.0]);
        assert!(gs_expectation_weights(3, 4).is_err());
        let huge = gs_expectation_weights(5000, 2500).unwrap();
        assert!((huge.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn capped_examples() {
        let mut rng = stream_rng(4, 0);
        let rule = CappedRule::new(0.5, 1, 4).exact();
        assert_eq!(capped_threshold(&[1.0, 2.0, 3.0, 4.0], &rule).unwrap(), 3.25);
        assert_eq!(capped_set(&[1.0, 2.0, 3.0, 4.0], &rule).unwrap(), vec![3]);
        assert_eq!(capped_select(&[1.0, 2.0, 3.0, 4.0], &rule, &mut rng).unwrap(), Some(3));

        let equal = [2.0; 5];
        assert_eq!(capped_set(&equal, &CappedRule::new(0.3, 2, 3)).unwrap(), vec![0, 1, 2, 3, 4]);
        let max_rule = CappedRule::new(0.0, 1, 4).exact();
        assert_eq!(capped_set(&[1.0, 4.0, 3.0, 4.0], &max_rule).unwrap(), vec![1, 3]);
        assert_eq!(capped_select(&[0.0, 0.0], &rule, &mut rng).unwrap(), None);
    }

    #[test]
    fn normalization() {
        assert_eq!(SamplingRule::Greedy { tau: 1 }.normalized(5).unwrap(), SamplingRule::Uniform);
        assert_eq!(SamplingRule::Greedy { tau: 5 }.normalized(5).unwrap(), SamplingRule::MaxDistance);
        assert!(SamplingRule::Greedy { tau: 6 }.normalized(5).is_err());
        assert!(SamplingRule::Capped(CappedRule::new(1.5, 1, 2)).normalized(5).is_err());
    }
}
