//! Sketch families `{S_1, ..., S_q}` and the per-index quantities of the
//! descent framework: loss `f_i(x) = ½‖Ax - b‖²_{H_i}`, metric gradient
//! `G⁻¹AᵀH_i(Ax - b)` and exact step `‖∇‖²_G / ‖∇‖²_{Z_i}`, where
//! `H_i = S_i (S_iᵀ A B⁻¹ Aᵀ S_i)† S_iᵀ` and `Z_i = Aᵀ H_i A`.
//!
//! Vector sketches (`Row`, `LsqColumn`, `Spectral`) reduce to a rank-one
//! formula: with `w = AᵀS_i` and `d = wᵀB⁻¹w`, the loss is `ρ²/(2d)` for
//! `ρ = wᵀx - S_iᵀb`, the gradient is `(ρ/d) G⁻¹w` and the step is the
//! x-independent constant `d / wᵀG⁻¹w`.

use std::ops::Range;

use crate::error::{check_len, Error, Result};
use crate::linalg::{pinv_psd, sym_eig, DenseMatrix, SpdFactor};
use crate::problem::{LinearSystem, Metric};
use crate::scalar::{axpy, dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchKind {
    /// `S_i = e_i`, `q = m`.
    Row,
    /// `S_i = A e_i`, `q = n`.
    LsqColumn,
    /// `S_i = I_{:C_i}` over a contiguous partition of the rows into
    /// blocks of `size` (the last block may be shorter).
    Block { size: usize },
    /// `S_i = u_i`, the eigenvectors of square SPD `A`.
    Spectral,
    /// `S_1 = A` for square SPD `A`, `q = 1`.
    Full,
}

impl SketchKind {
    pub fn label(&self) -> String {
        match self {
            SketchKind::Row => "row".into(),
            SketchKind::LsqColumn => "lsqcol".into(),
            SketchKind::Block { size } => format!("block:{size}"),
            SketchKind::Spectral => "spectral".into(),
            SketchKind::Full => "full".into(),
        }
    }
}

/// Result of evaluating one sketch index at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchEval<T> {
    pub index: usize,
    pub loss: T,
    pub direction: Vec<T>,
    /// `None` when the loss is zero; the update is then the identity.
    pub step: Option<T>,
}

#[derive(Debug, Clone)]
struct VectorSketch<T> {
    /// `AᵀS_i`
    w: Vec<T>,
    /// `G⁻¹AᵀS_i`
    gw: Vec<T>,
    /// `S_iᵀb`
    rhs: T,
    /// `wᵀB⁻¹w`; zero marks a sketch with `S_iᵀA = 0`.
    denom: T,
    step: T,
}

#[derive(Debug, Clone)]
struct BlockSketch<T> {
    rows: Range<usize>,
    /// `G⁻¹A_Cᵀ`, `n x |C|`
    g_inv_at: DenseMatrix<T>,
    /// `(A_C B⁻¹ A_Cᵀ)†`
    gram_pinv: DenseMatrix<T>,
}

#[derive(Debug, Clone)]
struct FullSketch<T> {
    /// `H_1`, `n x n`; `None` means `H_1 = A⁻¹` (the `B = A` case).
    h: Option<DenseMatrix<T>>,
    a_factor: SpdFactor<T>,
}

#[derive(Debug, Clone)]
enum FamilyData<T> {
    Vectors {
        sketches: Vec<VectorSketch<T>>,
        /// Columns are the sketch vectors for the spectral family.
        eigvecs: Option<DenseMatrix<T>>,
    },
    Blocks(Vec<BlockSketch<T>>),
    Full(FullSketch<T>),
}

/// An enumerable sketch family bound to one system.
#[derive(Debug, Clone)]
pub struct SketchFamily<'a, T> {
    system: &'a LinearSystem<T>,
    kind: SketchKind,
    data: FamilyData<T>,
}

fn require_square_spd<T: Scalar>(system: &LinearSystem<T>, kind: &str) -> Result<()> {
    if !system.a().is_square() || !system.is_symmetric() {
        return Err(Error::InvalidInput(format!(
            "{kind} sketches need a square symmetric A, got {}x{}",
            system.m(),
            system.n()
        )));
    }
    Ok(())
}

impl<'a, T: Scalar> SketchFamily<'a, T> {
    pub fn new(system: &'a LinearSystem<T>, kind: SketchKind) -> Result<Self> {
        let data = match kind {
            SketchKind::Row => Self::build_rows(system)?,
            SketchKind::LsqColumn => Self::build_lsq_columns(system)?,
            SketchKind::Spectral => Self::build_spectral(system)?,
            SketchKind::Block { size } => Self::build_blocks(system, size)?,
            SketchKind::Full => Self::build_full(system)?,
        };
        Ok(Self { system, kind, data })
    }

    fn vector_sketch(system: &LinearSystem<T>, w: Vec<T>, rhs: T, b_inv_w: Option<Vec<T>>) -> Result<VectorSketch<T>> {
        let b_inv_w = match b_inv_w {
            Some(v) => v,
            None => system.b_metric().solve(&w)?,
        };
        let denom = dot(&w, &b_inv_w);
        let gw = system.g_metric().solve(&w)?;
        let denom = if denom > T::zero() { denom } else { T::zero() };
        let step = if denom.is_zero() {
            T::zero()
        } else if system.metrics_equal() {
            T::one()
        } else {
            denom / dot(&w, &gw)
        };
        Ok(VectorSketch {
            w,
            gw,
            rhs,
            denom,
            step,
        })
    }

    fn build_rows(system: &LinearSystem<T>) -> Result<FamilyData<T>> {
        let a = system.a();
        let closed_b = matches!(system.b_metric().metric(), Metric::SystemMatrix);
        let sketches = (0..system.m())
            .map(|i| {
                let w = a.row(i).to_vec();
                // B = A symmetric: B⁻¹ Aᵀ e_i = e_i
                let b_inv_w = closed_b.then(|| {
                    let mut e = vec![T::zero(); system.n()];
                    e[i] = T::one();
                    e
                });
                Self::vector_sketch(system, w, system.b()[i], b_inv_w)
            })
            .collect::<Result<_>>()?;
        Ok(FamilyData::Vectors {
            sketches,
            eigvecs: None,
        })
    }

    fn build_lsq_columns(system: &LinearSystem<T>) -> Result<FamilyData<T>> {
        let a = system.a();
        let gram = a.gram();
        let atb = a.t_matvec(system.b());
        let closed_b = matches!(system.b_metric().metric(), Metric::Gram);
        let sketches = (0..system.n())
            .map(|j| {
                let w = gram.row(j).to_vec();
                // B = AᵀA: B⁻¹ AᵀA e_j = e_j
                let b_inv_w = closed_b.then(|| {
                    let mut e = vec![T::zero(); system.n()];
                    e[j] = T::one();
                    e
                });
                Self::vector_sketch(system, w, atb[j], b_inv_w)
            })
            .collect::<Result<_>>()?;
        Ok(FamilyData::Vectors {
            sketches,
            eigvecs: None,
        })
    }

    fn build_spectral(system: &LinearSystem<T>) -> Result<FamilyData<T>> {
        require_square_spd(system, "spectral")?;
        let eig = sym_eig(system.a())?;
        if eig.min() <= T::zero() {
            return Err(Error::NotSpd {
                min_eigenvalue: eig.min().as_f64(),
            });
        }
        let closed_b = matches!(system.b_metric().metric(), Metric::SystemMatrix);
        let sketches = (0..system.n())
            .map(|j| {
                let u = eig.vectors.column(j);
                let lambda = eig.values[j];
                let w: Vec<T> = u.iter().map(|v| *v * lambda).collect();
                let rhs = dot(&u, system.b());
                // B = A: B⁻¹ λu = u
                Self::vector_sketch(system, w, rhs, closed_b.then(|| u.clone()))
            })
            .collect::<Result<_>>()?;
        Ok(FamilyData::Vectors {
            sketches,
            eigvecs: Some(eig.vectors),
        })
    }

    fn build_blocks(system: &LinearSystem<T>, size: usize) -> Result<FamilyData<T>> {
        if size == 0 {
            return Err(Error::InvalidConfig("block size must be at least 1".into()));
        }
        let m = system.m();
        let a = system.a();
        let closed_b = matches!(system.b_metric().metric(), Metric::SystemMatrix);
        let b_inv = (!closed_b && !system.b_metric().is_identity()).then(|| system.b_metric().dense_inverse());
        let g_inv = (!system.g_metric().is_identity()).then(|| system.g_metric().dense_inverse());
        let mut blocks = Vec::with_capacity(m.div_ceil(size));
        for start in (0..m).step_by(size) {
            let rows = start..(start + size).min(m);
            let idx: Vec<usize> = rows.clone().collect();
            let a_c = a.select_rows(&idx);
            let a_ct = a_c.transpose();
            let gram = if closed_b {
                // A_C A⁻¹ A_Cᵀ = A[C, C] for symmetric A
                DenseMatrix::from_fn(idx.len(), idx.len(), |r, c| a[(idx[r], idx[c])])
            } else {
                match &b_inv {
                    None => a_c.matmul(&a_ct),
                    Some(bi) => a_c.matmul(bi).matmul(&a_ct),
                }
                .symmetrized()
            };
            let gram_pinv = pinv_psd(&gram, T::rank_tol())?;
            let g_inv_at = match &g_inv {
                None => a_ct,
                Some(gi) => gi.matmul(&a_ct),
            };
            blocks.push(BlockSketch {
                rows,
                g_inv_at,
                gram_pinv,
            });
        }
        Ok(FamilyData::Blocks(blocks))
    }

    fn build_full(system: &LinearSystem<T>) -> Result<FamilyData<T>> {
        require_square_spd(system, "full")?;
        let a_factor = match (system.b_metric().metric(), system.b_metric().factor()) {
            (Metric::SystemMatrix, Some(f)) => f.clone(),
            _ => SpdFactor::new(system.a().clone())?,
        };
        let h = if matches!(system.b_metric().metric(), Metric::SystemMatrix) {
            None
        } else {
            let a = system.a();
            let inner = a.matmul(&system.b_metric().dense_inverse()).matmul(a);
            let gram = a.matmul(&inner).matmul(a).symmetrized();
            Some(a.matmul(&pinv_psd(&gram, T::rank_tol())?).matmul(a).symmetrized())
        };
        Ok(FamilyData::Full(FullSketch { h, a_factor }))
    }

    pub fn system(&self) -> &'a LinearSystem<T> {
        self.system
    }

    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    /// Family size `q`.
    pub fn q(&self) -> usize {
        match &self.data {
            FamilyData::Vectors { sketches, .. } => sketches.len(),
            FamilyData::Blocks(b) => b.len(),
            FamilyData::Full(_) => 1,
        }
    }

    pub fn is_vector_family(&self) -> bool {
        matches!(self.data, FamilyData::Vectors { .. })
    }

    /// Rows of `A` covered by block `i`.
    pub fn block_rows(&self, i: usize) -> Option<Range<usize>> {
        match &self.data {
            FamilyData::Blocks(b) => b.get(i).map(|blk| blk.rows.clone()),
            _ => None,
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.q() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "sketch index {i} out of range for q = {}",
                self.q()
            )))
        }
    }

    fn block_residual(&self, blk: &BlockSketch<T>, x: &[T]) -> Vec<T> {
        let a = self.system.a();
        let b = self.system.b();
        blk.rows.clone().map(|r| dot(a.row(r), x) - b[r]).collect()
    }

    pub fn eval_loss(&self, i: usize, x: &[T]) -> Result<T> {
        self.check_index(i)?;
        check_len(self.system.n(), x.len())?;
        let half = T::of(0.5);
        Ok(match &self.data {
            FamilyData::Vectors { sketches, .. } => {
                let s = &sketches[i];
                if s.denom.is_zero() {
                    return Ok(T::zero());
                }
                let rho = dot(&s.w, x) - s.rhs;
                half * rho * rho / s.denom
            }
            FamilyData::Blocks(blocks) => {
                let blk = &blocks[i];
                let r = self.block_residual(blk, x);
                (half * dot(&r, &blk.gram_pinv.matvec(&r))).max(T::zero())
            }
            FamilyData::Full(full) => {
                let r = self.system.residual(x);
                let hr = match &full.h {
                    None => full.a_factor.solve(&r)?,
                    Some(h) => h.matvec(&r),
                };
                (half * dot(&r, &hr)).max(T::zero())
            }
        })
    }

    /// All `q` losses at `x`.
    pub fn losses(&self, x: &[T]) -> Result<Vec<T>> {
        (0..self.q()).map(|i| self.eval_loss(i, x)).collect()
    }

    pub fn eval_direction(&self, i: usize, x: &[T]) -> Result<Vec<T>> {
        Ok(self.eval(i, x)?.direction)
    }

    pub fn eval_step(&self, i: usize, x: &[T]) -> Result<Option<T>> {
        Ok(self.eval(i, x)?.step)
    }

    /// Loss, metric gradient and exact step at index `i`.
    pub fn eval(&self, i: usize, x: &[T]) -> Result<SketchEval<T>> {
        self.check_index(i)?;
        check_len(self.system.n(), x.len())?;
        let n = self.system.n();
        let half = T::of(0.5);
        let zero_eval = |loss: T| SketchEval {
            index: i,
            loss,
            direction: vec![T::zero(); n],
            step: None,
        };
        match &self.data {
            FamilyData::Vectors { sketches, .. } => {
                let s = &sketches[i];
                if s.denom.is_zero() {
                    return Ok(zero_eval(T::zero()));
                }
                let rho = dot(&s.w, x) - s.rhs;
                let loss = half * rho * rho / s.denom;
                if loss.is_zero() {
                    return Ok(zero_eval(loss));
                }
                let scale = rho / s.denom;
                Ok(SketchEval {
                    index: i,
                    loss,
                    direction: s.gw.iter().map(|v| *v * scale).collect(),
                    step: Some(s.step),
                })
            }
            FamilyData::Blocks(blocks) => {
                let blk = &blocks[i];
                let r = self.block_residual(blk, x);
                let coef = blk.gram_pinv.matvec(&r);
                let loss = (half * dot(&r, &coef)).max(T::zero());
                if loss.is_zero() {
                    return Ok(zero_eval(loss));
                }
                let direction = blk.g_inv_at.matvec(&coef);
                let step = if self.system.metrics_equal() {
                    Some(T::one())
                } else {
                    let g_norm = self.system.g_metric().norm_sq(&direction);
                    // ‖∇‖²_Z = (A_C ∇)ᵀ M† (A_C ∇)
                    let a = self.system.a();
                    let ad: Vec<T> = blk.rows.clone().map(|row| dot(a.row(row), &direction)).collect();
                    let z_norm = dot(&ad, &blk.gram_pinv.matvec(&ad));
                    (z_norm > T::zero()).then(|| g_norm / z_norm)
                };
                Ok(SketchEval {
                    index: i,
                    loss,
                    direction,
                    step,
                })
            }
            FamilyData::Full(full) => {
                let r = self.system.residual(x);
                let (loss, grad) = match &full.h {
                    // H = A⁻¹: loss ½ rᵀA⁻¹r, AᵀHr = r
                    None => {
                        let ainv_r = full.a_factor.solve(&r)?;
                        ((half * dot(&r, &ainv_r)).max(T::zero()), r)
                    }
                    Some(h) => {
                        let hr = h.matvec(&r);
                        let loss = (half * dot(&r, &hr)).max(T::zero());
                        (loss, self.system.a().t_matvec(&hr))
                    }
                };
                if loss.is_zero() {
                    return Ok(zero_eval(loss));
                }
                let direction = self.system.g_metric().solve(&grad)?;
                let step = if self.system.metrics_equal() {
                    Some(T::one())
                } else {
                    let g_norm = dot(&direction, &grad);
                    let z_norm = match &full.h {
                        None => dot(&direction, &self.system.a().matvec(&direction)),
                        Some(h) => {
                            let ad = self.system.a().matvec(&direction);
                            dot(&ad, &h.matvec(&ad))
                        }
                    };
                    (z_norm > T::zero()).then(|| g_norm / z_norm)
                };
                Ok(SketchEval {
                    index: i,
                    loss,
                    direction,
                    step,
                })
            }
        }
    }

    /// `S_i` as a dense `m x k` matrix.
    pub fn sketch_matrix(&self, i: usize) -> Result<DenseMatrix<T>> {
        self.check_index(i)?;
        let m = self.system.m();
        Ok(match (&self.data, self.kind) {
            (_, SketchKind::Row) => DenseMatrix::from_fn(m, 1, |r, _| if r == i { T::one() } else { T::zero() }),
            (_, SketchKind::LsqColumn) => DenseMatrix::column_vector(&self.system.a().column(i)),
            (FamilyData::Vectors { eigvecs: Some(v), .. }, SketchKind::Spectral) => {
                DenseMatrix::column_vector(&v.column(i))
            }
            (FamilyData::Blocks(blocks), _) => {
                let rows = blocks[i].rows.clone();
                DenseMatrix::from_fn(m, rows.len(), |r, c| {
                    if r == rows.start + c {
                        T::one()
                    } else {
                        T::zero()
                    }
                })
            }
            _ => self.system.a().clone(),
        })
    }

    /// `H_i` from its definition, through an explicit pseudo-inverse.
    pub fn h_matrix_generic(&self, i: usize) -> Result<DenseMatrix<T>> {
        let s = self.sketch_matrix(i)?;
        let a = self.system.a();
        let sta = s.transpose().matmul(a);
        let inner = sta
            .matmul(&self.system.b_metric().dense_inverse())
            .matmul(&sta.transpose())
            .symmetrized();
        let pinv = pinv_psd(&inner, T::rank_tol())?;
        Ok(s.matmul(&pinv).matmul(&s.transpose()).symmetrized())
    }

    /// `Z_i = AᵀH_iA` from its definition.
    pub fn z_matrix_generic(&self, i: usize) -> Result<DenseMatrix<T>> {
        let a = self.system.a();
        Ok(a.transpose().matmul(&self.h_matrix_generic(i)?).matmul(a).symmetrized())
    }

    /// `Z_i` through the family's closed form.
    pub fn z_matrix(&self, i: usize) -> Result<DenseMatrix<T>> {
        self.check_index(i)?;
        let n = self.system.n();
        Ok(match &self.data {
            FamilyData::Vectors { sketches, .. } => {
                let s = &sketches[i];
                if s.denom.is_zero() {
                    DenseMatrix::zeros(n, n)
                } else {
                    DenseMatrix::from_fn(n, n, |r, c| s.w[r] * s.w[c] / s.denom)
                }
            }
            FamilyData::Blocks(blocks) => {
                let blk = &blocks[i];
                let idx: Vec<usize> = blk.rows.clone().collect();
                let a_c = self.system.a().select_rows(&idx);
                a_c.transpose().matmul(&blk.gram_pinv).matmul(&a_c).symmetrized()
            }
            FamilyData::Full(full) => match &full.h {
                None => self.system.a().clone(),
                Some(h) => {
                    let a = self.system.a();
                    a.transpose().matmul(h).matmul(a).symmetrized()
                }
            },
        })
    }

    /// Reference evaluation straight from the definitions of `H_i`, `Z_i`.
    pub fn eval_generic(&self, i: usize, x: &[T]) -> Result<SketchEval<T>> {
        check_len(self.system.n(), x.len())?;
        let h = self.h_matrix_generic(i)?;
        let a = self.system.a();
        let r = self.system.residual(x);
        let hr = h.matvec(&r);
        let loss = (T::of(0.5) * dot(&r, &hr)).max(T::zero());
        let grad = a.t_matvec(&hr);
        let direction = self.system.g_metric().solve(&grad)?;
        let z = a.transpose().matmul(&h).matmul(a);
        let z_norm = dot(&direction, &z.matvec(&direction));
        let step = if loss.is_zero() || z_norm <= T::zero() {
            None
        } else {
            Some(dot(&direction, &grad) / z_norm)
        };
        Ok(SketchEval {
            index: i,
            loss,
            direction,
            step,
        })
    }
}

pub(crate) fn validate_omega<T: Scalar>(omega: T) -> Result<()> {
    if omega > T::zero() && omega < T::of(2.0) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("relaxation omega = {omega} must lie in (0, 2)")))
    }
}

/// `x - ω α ∇`; the identity when the step is undefined.
pub fn apply_update<T: Scalar>(x: &[T], eval: &SketchEval<T>, omega: T) -> Result<Vec<T>> {
    validate_omega(omega)?;
    check_len(x.len(), eval.direction.len())?;
    let mut out = x.to_vec();
    if let Some(step) = eval.step {
        axpy(-(omega * step), &eval.direction, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(rows: &[&[f64]], b: &[f64]) -> LinearSystem<f64> {
        let a = DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        LinearSystem::new(a, b.to_vec()).unwrap()
    }

    #[test]
    fn row_loss_and_direction() {
        let sys = system(&[&[1.0, 0.0], &[0.0, 2.0]], &[1.0, 2.0]);
        let fam = SketchFamily::new(&sys, SketchKind::Row).unwrap();
        assert_eq!(fam.eval_loss(0, &[0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(fam.eval_loss(1, &[1.0, 1.0]).unwrap(), 0.0);
        assert!(fam.eval_loss(2, &[0.0, 0.0]).is_err());

        let sys = system(&[&[1.0, 0.0]], &[1.0]);
        let fam = SketchFamily::new(&sys, SketchKind::Row).unwrap();
        assert_eq!(fam.eval_direction(0, &[0.0, 0.0]).unwrap(), vec![-1.0, 0.0]);
        let e = fam.eval(0, &[1.0, 5.0]).unwrap();
        assert_eq!(e.step, None);
        assert_eq!(e.direction, vec![0.0, 0.0]);
    }

    #[test]
    fn spectral_closed_form() {
        let sys = system(&[&[1.0, 0.0], &[0.0, 2.0]], &[0.0, 0.0])
            .with_metrics(Metric::SystemMatrix, Metric::SystemMatrix)
            .unwrap();
        let fam = SketchFamily::new(&sys, SketchKind::Spectral).unwrap();
        // u₁ = ±e₁ with λ₁ = 1
        assert!((fam.eval_loss(0, &[3.0, 0.0]).unwrap() - 4.5).abs() < 1e-14);
        assert_eq!(fam.eval_step(0, &[3.0, 0.0]).unwrap(), Some(1.0));
    }

    #[test]
    fn full_family_is_steepest_descent() {
        let sys = system(&[&[1.0, 0.0], &[0.0, 2.0]], &[0.0, 0.0])
            .with_metrics(Metric::SystemMatrix, Metric::Identity)
            .unwrap();
        let fam = SketchFamily::new(&sys, SketchKind::Full).unwrap();
        let x = [1.0, 1.0];
        let e = fam.eval(0, &x).unwrap();
        assert_eq!(e.direction, sys.residual(&x));
        let step = e.step.unwrap();
        assert!((step - 5.0 / 9.0).abs() < 1e-15);
        let next = apply_update(&x, &e, 1.0).unwrap();
        assert!((next[0] - 4.0 / 9.0).abs() < 1e-15);
        assert!((next[1] + 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn update_rules() {
        let sys = system(&[&[1.0, 1.0]], &[2.0]);
        let fam = SketchFamily::new(&sys, SketchKind::Row).unwrap();
        let e = fam.eval(0, &[0.0, 0.0]).unwrap();
        assert!(apply_update(&[0.0, 0.0], &e, 2.0).is_err());
        assert!(apply_update(&[0.0, 0.0], &e, 0.0).is_err());
        let next = apply_update(&[0.0, 0.0], &e, 1.0).unwrap();
        assert_eq!(fam.eval_loss(0, &next).unwrap(), 0.0);
        let zero = SketchEval {
            index: 0,
            loss: 0.0,
            direction: vec![0.0, 0.0],
            step: Some(1.0),
        };
        assert_eq!(apply_update(&[3.0, 4.0], &zero, 1.0).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn block_partition_is_contiguous() {
        let sys = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]], &[1.0, 1.0, 2.0]);
        let fam = SketchFamily::new(&sys, SketchKind::Block { size: 2 }).unwrap();
        assert_eq!(fam.q(), 2);
        assert_eq!(fam.block_rows(0), Some(0..2));
        assert_eq!(fam.block_rows(1), Some(2..3));
        assert!(SketchFamily::new(&sys, SketchKind::Block { size: 0 }).is_err());
        assert!(SketchFamily::new(&sys, SketchKind::Full).is_err());
    }
}
