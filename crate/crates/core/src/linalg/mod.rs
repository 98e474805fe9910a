//! Dense symmetric kernels: eigendecomposition, PSD pseudo-inverse, SPD
//! factorizations and weighted norms.

mod eigen;
mod matrix;
mod spd;

pub use eigen::{sym_eig, SymEigen};
pub use matrix::DenseMatrix;
pub use spd::{inv_sqrt_spd, pinv_psd, solve_spd, sqrt_spd, weighted_norm_sq, SpdFactor};
