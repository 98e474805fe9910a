//! Consistent linear systems `Ax = b` together with the two metrics the
//! solvers work in: `B` (the projection metric) and `G` (the descent metric).

mod generate;
mod libsvm;
mod matrix_market;

use std::sync::Arc;

pub use generate::{gen_gaussian, gen_gaussian_spd, make_consistent, GenKind, GenSpec};
pub use libsvm::{load_libsvm, parse_libsvm, LibsvmOptions};
pub use matrix_market::{
    load_matrix_market, parse_matrix_market, save_matrix_market_array, write_matrix_market_array,
    MAX_DENSE_DIM,
};

use crate::error::{check_len, Error, Result};
use crate::linalg::{DenseMatrix, SpdFactor};
use crate::scalar::{dot, norm, Scalar};

/// An `n x n` SPD metric, described symbolically where it has a closed form
/// in terms of `A` so the sketch families can use exact shortcuts.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric<T> {
    Identity,
    /// `A` itself (requires square SPD `A`).
    SystemMatrix,
    /// `AᵀA` (requires full column rank `A`).
    Gram,
    Dense(DenseMatrix<T>),
}

impl<T: Scalar> Metric<T> {
    pub fn materialize(&self, a: &DenseMatrix<T>) -> DenseMatrix<T> {
        match self {
            Metric::Identity => DenseMatrix::identity(a.cols()),
            Metric::SystemMatrix => a.clone(),
            Metric::Gram => a.gram(),
            Metric::Dense(m) => m.clone(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Metric::Identity => "I",
            Metric::SystemMatrix => "A",
            Metric::Gram => "AtA",
            Metric::Dense(_) => "dense",
        }
    }
}

/// A metric together with its factorization (absent for the identity).
#[derive(Debug, Clone)]
pub struct MetricOperator<T> {
    metric: Metric<T>,
    factor: Option<Arc<SpdFactor<T>>>,
    dim: usize,
}

impl<T: Scalar> MetricOperator<T> {
    fn new(metric: Metric<T>, a: &DenseMatrix<T>, a_factor: &mut Option<Arc<SpdFactor<T>>>) -> Result<Self> {
        let n = a.cols();
        let factor = match &metric {
            Metric::Identity => None,
            Metric::SystemMatrix => {
                if !a.is_square() {
                    return Err(Error::InvalidInput(
                        "metric B or G = A needs a square system matrix".into(),
                    ));
                }
                if a_factor.is_none() {
                    *a_factor = Some(Arc::new(SpdFactor::new(a.clone())?));
                }
                a_factor.clone()
            }
            Metric::Gram => Some(Arc::new(SpdFactor::new(a.gram())?)),
            Metric::Dense(m) => {
                if m.shape() != (n, n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: m.rows(),
                    });
                }
                Some(Arc::new(SpdFactor::new(m.clone())?))
            }
        };
        Ok(Self {
            metric,
            factor,
            dim: n,
        })
    }

    pub fn metric(&self) -> &Metric<T> {
        &self.metric
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.metric, Metric::Identity)
    }

    pub fn factor(&self) -> Option<&SpdFactor<T>> {
        self.factor.as_deref()
    }

    /// `M v`
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        match &self.factor {
            None => v.to_vec(),
            Some(f) => f.apply(v),
        }
    }

    /// `M⁻¹ v`
    pub fn solve(&self, v: &[T]) -> Result<Vec<T>> {
        check_len(self.dim, v.len())?;
        match &self.factor {
            None => Ok(v.to_vec()),
            Some(f) => f.solve(v),
        }
    }

    /// `vᵀ M v`
    pub fn norm_sq(&self, v: &[T]) -> T {
        dot(v, &self.apply(v))
    }

    pub fn dense(&self) -> DenseMatrix<T> {
        match &self.factor {
            None => DenseMatrix::identity(self.dim),
            Some(f) => f.matrix().clone(),
        }
    }

    pub fn dense_inverse(&self) -> DenseMatrix<T> {
        match &self.factor {
            None => DenseMatrix::identity(self.dim),
            Some(f) => f.inverse(),
        }
    }

    pub fn sqrt(&self) -> DenseMatrix<T> {
        match &self.factor {
            None => DenseMatrix::identity(self.dim),
            Some(f) => f.sqrt().clone(),
        }
    }

    pub fn inv_sqrt(&self) -> DenseMatrix<T> {
        match &self.factor {
            None => DenseMatrix::identity(self.dim),
            Some(f) => f.inv_sqrt().clone(),
        }
    }
}

/// A consistent system `Ax = b` with metrics `B`, `G`.
///
/// Invariants checked at construction: `A` has no zero rows, `B` and `G` are
/// SPD, and a stored solution satisfies `‖A x* - b‖ ≤ tol (1 + ‖b‖)`.
#[derive(Debug, Clone)]
pub struct LinearSystem<T> {
    a: DenseMatrix<T>,
    b: Vec<T>,
    b_metric: MetricOperator<T>,
    g_metric: MetricOperator<T>,
    metrics_equal: bool,
    x_star: Option<Vec<T>>,
    anchor: Option<Vec<T>>,
}

/// Relative consistency tolerance for stored solutions.
pub fn consistency_tol<T: Scalar>() -> T {
    T::of(1e-10).max(T::epsilon() * T::of(1e3))
}

impl<T: Scalar> LinearSystem<T> {
    /// System with `B = G = I`.
    pub fn new(a: DenseMatrix<T>, b: Vec<T>) -> Result<Self> {
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        check_len(a.rows(), b.len())?;
        if let Some(i) = (0..a.rows()).find(|&i| a.row(i).iter().all(|v| v.is_zero())) {
            return Err(Error::InvalidInput(format!("row {i} of A is zero")));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("right-hand side has non-finite entries".into()));
        }
        let n = a.cols();
        Ok(Self {
            a,
            b,
            b_metric: MetricOperator {
                metric: Metric::Identity,
                factor: None,
                dim: n,
            },
            g_metric: MetricOperator {
                metric: Metric::Identity,
                factor: None,
                dim: n,
            },
            metrics_equal: true,
            x_star: None,
            anchor: None,
        })
    }

    /// Replaces both metrics, checking that each is SPD.
    pub fn with_metrics(mut self, b_metric: Metric<T>, g_metric: Metric<T>) -> Result<Self> {
        let mut a_factor = None;
        let bm = MetricOperator::new(b_metric, &self.a, &mut a_factor)?;
        let gm = if g_metric == bm.metric {
            bm.clone()
        } else {
            MetricOperator::new(g_metric, &self.a, &mut a_factor)?
        };
        self.metrics_equal = bm.metric == gm.metric || bm.dense() == gm.dense();
        self.b_metric = bm;
        self.g_metric = gm;
        Ok(self)
    }

    pub fn with_solution(mut self, x_star: Vec<T>) -> Result<Self> {
        check_len(self.n(), x_star.len())?;
        let r = self.residual_norm(&x_star);
        let bound = consistency_tol::<T>() * (T::one() + norm(&self.b));
        if r > bound {
            return Err(Error::InvalidInput(format!(
                "stored solution is inconsistent: ‖Ax* - b‖ = {r:e} > {bound:e}"
            )));
        }
        self.x_star = Some(x_star);
        Ok(self)
    }

    /// Stores the anchor `t` of the constrained least-norm problem. It does
    /// not influence any solver; the limit point is fixed by `x₀`.
    pub fn with_anchor(mut self, anchor: Vec<T>) -> Result<Self> {
        check_len(self.n(), anchor.len())?;
        self.anchor = Some(anchor);
        Ok(self)
    }

    pub fn a(&self) -> &DenseMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn x_star(&self) -> Option<&[T]> {
        self.x_star.as_deref()
    }

    pub fn anchor(&self) -> Option<&[T]> {
        self.anchor.as_deref()
    }

    pub fn b_metric(&self) -> &MetricOperator<T> {
        &self.b_metric
    }

    pub fn g_metric(&self) -> &MetricOperator<T> {
        &self.g_metric
    }

    /// True when `G = B`, in which case every exact step length is 1.
    pub fn metrics_equal(&self) -> bool {
        self.metrics_equal
    }

    /// `Ax - b`
    pub fn residual(&self, x: &[T]) -> Vec<T> {
        let mut r = self.a.matvec(x);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= *bi;
        }
        r
    }

    pub fn residual_norm(&self, x: &[T]) -> T {
        norm(&self.residual(x))
    }

    /// Whether `A` is square and symmetric (to `rank_tol`).
    pub fn is_symmetric(&self) -> bool {
        self.a.is_symmetric(T::rank_tol())
    }

    /// Converts every stored quantity to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Result<LinearSystem<U>> {
        let cast_metric = |m: &Metric<T>| match m {
            Metric::Identity => Metric::Identity,
            Metric::SystemMatrix => Metric::SystemMatrix,
            Metric::Gram => Metric::Gram,
            Metric::Dense(d) => Metric::Dense(d.cast()),
        };
        let cv = |v: &[T]| v.iter().map(|x| U::of(x.as_f64())).collect::<Vec<U>>();
        let mut out = LinearSystem::new(self.a.cast(), cv(&self.b))?
            .with_metrics(cast_metric(&self.b_metric.metric), cast_metric(&self.g_metric.metric))?;
        out.x_star = self.x_star.as_deref().map(cv);
        out.anchor = self.anchor.as_deref().map(cv);
        Ok(out)
    }
}
