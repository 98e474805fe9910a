use log::warn;

use super::{LinearSystem, Metric};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::Gaussian;
use crate::scalar::Scalar;

/// Stream indices under a generator seed.
const MATRIX_STREAM: u64 = 0;
const SOLUTION_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    /// `A` is `m x n` with i.i.d. standard normal entries.
    Gaussian,
    /// `A = WᵀW` for an `m x n` standard normal `W`.
    GaussianNormalEquations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn gaussian(m: usize, n: usize, seed: u64) -> Self {
        Self {
            kind: GenKind::Gaussian,
            m,
            n,
            seed,
        }
    }

    pub fn gaussian_spd(m: usize, n: usize, seed: u64) -> Self {
        Self {
            kind: GenKind::GaussianNormalEquations,
            m,
            n,
            seed,
        }
    }

    pub fn generate<T: Scalar>(&self) -> Result<LinearSystem<T>> {
        match self.kind {
            GenKind::Gaussian => gen_gaussian(self),
            GenKind::GaussianNormalEquations => gen_gaussian_spd(self),
        }
    }

    fn check(&self, kind: GenKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidInput(format!(
                "generator spec has kind {:?}, expected {kind:?}",
                self.kind
            )));
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidInput(format!(
                "generator needs m, n >= 1, got {}x{}",
                self.m, self.n
            )));
        }
        Ok(())
    }
}

fn gaussian_matrix<T: Scalar>(rows: usize, cols: usize, seed: u64) -> DenseMatrix<T> {
    let mut g = Gaussian::from_seed(seed, MATRIX_STREAM);
    DenseMatrix::from_fn(rows, cols, |_, _| T::of(g.sample()))
}

fn gaussian_vector<T: Scalar>(len: usize, seed: u64) -> Vec<T> {
    let mut g = Gaussian::from_seed(seed, SOLUTION_STREAM);
    g.vector(len).into_iter().map(T::of).collect()
}

fn consistent_system<T: Scalar>(a: DenseMatrix<T>, seed: u64) -> Result<LinearSystem<T>> {
    let x_star = gaussian_vector(a.cols(), seed);
    let b = a.matvec(&x_star);
    LinearSystem::new(a, b)?.with_solution(x_star)
}

/// Standard normal `m x n` system with a planted normal solution.
pub fn gen_gaussian<T: Scalar>(spec: &GenSpec) -> Result<LinearSystem<T>> {
    spec.check(GenKind::Gaussian)?;
    consistent_system(gaussian_matrix(spec.m, spec.n, spec.seed), spec.seed)
}

/// Square `n x n` system `A = WᵀW` with `W` standard normal `m x n`.
pub fn gen_gaussian_spd<T: Scalar>(spec: &GenSpec) -> Result<LinearSystem<T>> {
    spec.check(GenKind::GaussianNormalEquations)?;
    if spec.m < spec.n {
        return Err(Error::InvalidInput(format!(
            "normal-equations generator needs m >= n, got {}x{}",
            spec.m, spec.n
        )));
    }
    let w = gaussian_matrix::<f64>(spec.m, spec.n, spec.seed);
    consistent_system(w.gram().cast(), spec.seed)
}

/// Plants a seeded normal solution for `a` and sets `b = a x*`.
///
/// Zero rows are dropped with a warning. Metrics default to the identity.
pub fn make_consistent<T: Scalar>(
    a: DenseMatrix<T>,
    seed: u64,
    b_metric: Option<Metric<T>>,
    g_metric: Option<Metric<T>>,
) -> Result<LinearSystem<T>> {
    let a = if a.has_zero_row() {
        let keep: Vec<usize> = (0..a.rows())
            .filter(|&i| a.row(i).iter().any(|v| !v.is_zero()))
            .collect();
        warn!("dropping {} zero rows of A", a.rows() - keep.len());
        a.select_rows(&keep)
    } else {
        a
    };
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let sys = consistent_system(a, seed)?;
    sys.with_metrics(
        b_metric.unwrap_or(Metric::Identity),
        g_metric.unwrap_or(Metric::Identity),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pinv_psd, sym_eig};

    #[test]
    fn gaussian_is_consistent_and_deterministic() {
        let spec = GenSpec::gaussian(3, 2, 7);
        let s1 = gen_gaussian::<f64>(&spec).unwrap();
        let s2 = gen_gaussian::<f64>(&spec).unwrap();
        assert_eq!(s1.residual_norm(s1.x_star().unwrap()), 0.0);
        assert_eq!(s1.a(), s2.a());
        assert_eq!(s1.b(), s2.b());
        assert_eq!(s1.x_star(), s2.x_star());
        let big = gen_gaussian::<f64>(&GenSpec::gaussian(200, 60, 3)).unwrap();
        assert_eq!((big.m(), big.n()), (200, 60));
        assert!(gen_gaussian::<f64>(&GenSpec::gaussian(0, 2, 1)).is_err());
        assert!(gen_gaussian::<f64>(&GenSpec::gaussian_spd(3, 2, 1)).is_err());
    }

    #[test]
    fn normal_equations_are_spd_and_recoverable() {
        let sys = gen_gaussian_spd::<f64>(&GenSpec::gaussian_spd(10, 4, 1)).unwrap();
        assert_eq!(sys.a().shape(), (4, 4));
        assert!(sys.a().asymmetry() <= 1e-12 * sys.a().max_abs());
        assert!(sym_eig(sys.a()).unwrap().min() > 0.0);
        let x = pinv_psd(sys.a(), 1e-12).unwrap().matvec(sys.b());
        for (xi, si) in x.iter().zip(sys.x_star().unwrap()) {
            assert!((xi - si).abs() < 1e-8);
        }
        let bc = gen_gaussian_spd::<f64>(&GenSpec::gaussian_spd(48, 48, 2)).unwrap();
        assert_eq!(bc.a().shape(), (48, 48));
        assert!(gen_gaussian_spd::<f64>(&GenSpec::gaussian_spd(3, 4, 1)).is_err());
    }

    #[test]
    fn make_consistent_examples() {
        let sys = make_consistent(DenseMatrix::<f64>::identity(3), 5, None, None).unwrap();
        assert_eq!(sys.b(), sys.x_star().unwrap());
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 0.0], vec![3.0, 1.0]]).unwrap();
        let sys = make_consistent(a, 5, None, None).unwrap();
        assert_eq!(sys.m(), 2);
        assert!(sys.residual_norm(sys.x_star().unwrap()) == 0.0);

        let spd = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!(sym_eig(&spd).unwrap().min() > 0.0);
        assert!(make_consistent(spd, 1, Some(Metric::SystemMatrix), None).is_ok());
        let indefinite = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(sym_eig(&indefinite).unwrap().min() < 0.0);
        assert!(make_consistent(indefinite, 1, Some(Metric::SystemMatrix), None).is_err());
    }
}
