use std::sync::OnceLock;

use super::{sym_eig, DenseMatrix};
use crate::error::{check_len, Error, Result};
use crate::scalar::{dot, Scalar};

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix.
///
/// Eigenvalues at or below `tol * λ_max` are treated as zero. Eigenvalues
/// below `-tol * λ_max` mean the input is not PSD.
pub fn pinv_psd<T: Scalar>(m: &DenseMatrix<T>, tol: T) -> Result<DenseMatrix<T>> {
    let eig = sym_eig(m)?;
    let lmax = eig.max();
    if lmax <= T::zero() {
        if eig.min() < -tol * eig.spectral_radius() {
            return Err(Error::NotPsd {
                eigenvalue: eig.min().as_f64(),
            });
        }
        return Ok(DenseMatrix::zeros(m.rows(), m.cols()));
    }
    let cutoff = tol * lmax;
    if eig.min() < -cutoff {
        return Err(Error::NotPsd {
            eigenvalue: eig.min().as_f64(),
        });
    }
    Ok(eig.reconstruct_with(|v| if v > cutoff { v.recip() } else { T::zero() }))
}

/// `M^{-1/2}` for symmetric positive definite `M`.
pub fn inv_sqrt_spd<T: Scalar>(m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let eig = sym_eig(m)?;
    if eig.min() <= T::zero() {
        return Err(Error::NotSpd {
            min_eigenvalue: eig.min().as_f64(),
        });
    }
    Ok(eig.reconstruct_with(|v| v.sqrt().recip()))
}

/// `M^{1/2}` for symmetric positive definite `M`.
pub fn sqrt_spd<T: Scalar>(m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let eig = sym_eig(m)?;
    if eig.min() <= T::zero() {
        return Err(Error::NotSpd {
            min_eigenvalue: eig.min().as_f64(),
        });
    }
    Ok(eig.reconstruct_with(|v| v.sqrt()))
}

/// `xᵀ M x`
pub fn weighted_norm_sq<T: Scalar>(x: &[T], m: &DenseMatrix<T>) -> Result<T> {
    check_len(m.rows(), x.len())?;
    check_len(m.cols(), x.len())?;
    Ok(dot(x, &m.matvec(x)))
}

/// Cholesky factorization of an SPD matrix, plus lazily computed square
/// roots. Immutable after construction; the cached roots are filled at most
/// once and are safe to share between threads.
#[derive(Debug)]
pub struct SpdFactor<T> {
    source: DenseMatrix<T>,
    lower: DenseMatrix<T>,
    sqrt: OnceLock<DenseMatrix<T>>,
    inv_sqrt: OnceLock<DenseMatrix<T>>,
}

impl<T: Scalar> SpdFactor<T> {
    pub fn new(m: DenseMatrix<T>) -> Result<Self> {
        if !m.is_symmetric(T::rank_tol()) {
            return Err(Error::InvalidInput(
                "SPD factor needs a square symmetric matrix".into(),
            ));
        }
        let n = m.rows();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut diag = m[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if diag <= T::zero() || !diag.is_finite() {
                let min_eigenvalue = sym_eig(&m).map(|e| e.min().as_f64()).unwrap_or(f64::NAN);
                return Err(Error::NotSpd { min_eigenvalue });
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self {
            source: m,
            lower: l,
            sqrt: OnceLock::new(),
            inv_sqrt: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.source.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.source
    }

    /// `M v`
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        self.source.matvec(v)
    }

    /// `M⁻¹ v` by two triangular solves and one refinement step.
    pub fn solve(&self, v: &[T]) -> Result<Vec<T>> {
        check_len(self.dim(), v.len())?;
        let mut y = self.triangular_solve(v);
        let resid: Vec<T> = self
            .source
            .matvec(&y)
            .iter()
            .zip(v)
            .map(|(my, vi)| *vi - *my)
            .collect();
        let corr = self.triangular_solve(&resid);
        for (yi, ci) in y.iter_mut().zip(corr) {
            *yi += ci;
        }
        Ok(y)
    }

    fn triangular_solve(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        let l = &self.lower;
        let mut z = v.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= l[(i, k)] * z[k];
            }
            z[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * z[k];
            }
            z[i] = s / l[(i, i)];
        }
        z
    }

    /// `M⁻¹` as a dense matrix.
    pub fn inverse(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            let col = self.solve(&e).expect("dimension checked");
            for (i, c) in col.into_iter().enumerate() {
                inv[(i, j)] = c;
            }
            e[j] = T::zero();
        }
        inv.symmetrized()
    }

    pub fn sqrt(&self) -> &DenseMatrix<T> {
        self.sqrt
            .get_or_init(|| sqrt_spd(&self.source).expect("Cholesky succeeded so M is SPD"))
    }

    pub fn inv_sqrt(&self) -> &DenseMatrix<T> {
        self.inv_sqrt
            .get_or_init(|| inv_sqrt_spd(&self.source).expect("Cholesky succeeded so M is SPD"))
    }
}

impl<T: Clone> Clone for SpdFactor<T> {
    fn clone(&self) -> Self {
        Self {
            source: self.source.clone(),
            lower: self.lower.clone(),
            sqrt: self.sqrt.clone(),
            inv_sqrt: self.inv_sqrt.clone(),
        }
    }
}

/// `M⁻¹ v` through a prepared factorization.
pub fn solve_spd<T: Scalar>(m: &SpdFactor<T>, v: &[T]) -> Result<Vec<T>> {
    m.solve(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn assert_close(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>, tol: f64) {
        let d = a.sub(b).max_abs();
        assert!(d <= tol, "max deviation {d:e} > {tol:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn pinv_examples() {
        let p = pinv_psd(&DenseMatrix::from_diag(&[2.0, 0.0]), 1e-12).unwrap();
        assert_close(&p, &DenseMatrix::from_diag(&[0.5, 0.0]), 1e-15);
        let z = pinv_psd(&DenseMatrix::<f64>::zeros(3, 3), 1e-12).unwrap();
        assert_eq!(z, DenseMatrix::zeros(3, 3));
        // single eigenvalue 2 along (1,1)/√2 => pinv = (1/2) vvᵀ
        let p = pinv_psd(&mat(&[&[1.0, 1.0], &[1.0, 1.0]]), 1e-12).unwrap();
        assert_close(&p, &mat(&[&[0.25, 0.25], &[0.25, 0.25]]), 1e-15);
    }

    #[test]
    fn pinv_rejects_indefinite() {
        let m = mat(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert!(matches!(pinv_psd(&m, 1e-12), Err(Error::NotPsd { .. })));
        let m = mat(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(pinv_psd(&m, 1e-12), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn inverse_square_roots() {
        let r = inv_sqrt_spd(&DenseMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert_close(&r, &DenseMatrix::from_diag(&[0.5, 1.0 / 3.0]), 1e-15);
        let r = inv_sqrt_spd(&DenseMatrix::<f64>::identity(3)).unwrap();
        assert_close(&r, &DenseMatrix::identity(3), 1e-15);
        // eigenvalues 1 and 3
        let m = mat(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let r = inv_sqrt_spd(&m).unwrap();
        assert_close(&r.matmul(&m).matmul(&r), &DenseMatrix::identity(2), 1e-14);
        assert!(r.asymmetry() < 1e-15);
        assert!(matches!(
            inv_sqrt_spd(&DenseMatrix::from_diag(&[1.0, 0.0])),
            Err(Error::NotSpd { .. })
        ));
    }

    #[test]
    fn spd_solves() {
        let f = SpdFactor::new(DenseMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(f.solve(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        let f = SpdFactor::new(DenseMatrix::from_diag(&[2.0, 4.0])).unwrap();
        assert_eq!(solve_spd(&f, &[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
        let f = SpdFactor::new(mat(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let y = f.solve(&[3.0, 3.0]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
        assert!(matches!(f.solve(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            SpdFactor::new(mat(&[&[1.0, 2.0], &[2.0, 1.0]])),
            Err(Error::NotSpd { .. })
        ));
    }

    #[test]
    fn weighted_norms() {
        let x = [1.0, -2.0, 3.0];
        assert_eq!(weighted_norm_sq(&x, &DenseMatrix::identity(3)).unwrap(), 14.0);
        let m = mat(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert_eq!(weighted_norm_sq(&[0.0, 0.0], &m).unwrap(), 0.0);
        assert_eq!(weighted_norm_sq(&[1.0, 1.0], &m).unwrap(), 6.0);
        assert!(weighted_norm_sq(&[1.0], &m).is_err());
    }
}
