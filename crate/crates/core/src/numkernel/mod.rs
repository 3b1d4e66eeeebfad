//! Dense complex Hermitian linear algebra.

mod cmat;
mod eigen;
pub mod mpfloat;

pub use cmat::{CMat, C64};
pub use eigen::{hermitian_eigen, Eigen};
pub use mpfloat::MpFloat;

use serde::Serialize;
use thiserror::Error;

/// Default tolerance of the double-precision paths.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default zero band for inertia counts.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("matrix is not Hermitian (max |H - H*| = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is singular (pivot {pivot:e} below threshold {threshold:e})")]
    Singular { pivot: f64, threshold: f64 },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
}

/// Eigenvalue sign counts of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inertia {
    pub n_neg: usize,
    pub n_zero: usize,
    pub n_pos: usize,
    pub zero_tol: f64,
}

impl Inertia {
    pub fn from_values(values: &[f64], zero_tol: f64) -> Self {
        let n_neg = values.iter().filter(|&&l| l < -zero_tol).count();
        let n_pos = values.iter().filter(|&&l| l > zero_tol).count();
        Self { n_neg, n_zero: values.len() - n_neg - n_pos, n_pos, zero_tol }
    }

    pub fn dim(&self) -> usize {
        self.n_neg + self.n_zero + self.n_pos
    }
}

/// Counts of eigenvalues below, inside and above `[-zero_tol, zero_tol]`.
pub fn inertia(h: &CMat, zero_tol: f64) -> Result<Inertia, NumError> {
    let e = hermitian_eigen(h, DEFAULT_TOL)?;
    Ok(Inertia::from_values(&e.values, zero_tol))
}

/// Gauss-Jordan inverse with partial pivoting. A pivot smaller than
/// `cond_tol * max|M_ij|` is reported as singular.
pub fn invert(m: &CMat, cond_tol: f64) -> Result<CMat, NumError> {
    if !m.is_square() {
        return Err(NumError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if !m.is_finite() {
        return Err(NumError::NonFinite);
    }
    let n = m.rows();
    let threshold = cond_tol * m.max_abs();
    let mut a = m.clone();
    let mut inv = CMat::identity(n);
    for col in 0..n {
        let (piv_row, piv) = (col..n)
            .map(|r| (r, a[(r, col)].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty range");
        if piv <= threshold || piv == 0.0 {
            return Err(NumError::Singular { pivot: piv, threshold });
        }
        if piv_row != col {
            for j in 0..n {
                let t = a[(col, j)];
                a[(col, j)] = a[(piv_row, j)];
                a[(piv_row, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(piv_row, j)];
                inv[(piv_row, j)] = t;
            }
        }
        // reciprocal without squaring the modulus, which would underflow for tiny pivots
        let pv = a[(col, col)];
        let d = (pv / piv).conj() / piv;
        for j in 0..n {
            a[(col, j)] *= d;
            inv[(col, j)] *= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let acj = a[(col, j)];
                let icj = inv[(col, j)];
                a[(r, j)] -= f * acj;
                inv[(r, j)] -= f * icj;
            }
        }
    }
    Ok(inv)
}

/// `true` iff `Y - X` has no eigenvalue below `-tol`.
pub fn psd_order_check(x: &CMat, y: &CMat, tol: f64) -> Result<bool, NumError> {
    if (x.rows(), x.cols()) != (y.rows(), y.cols()) {
        return Err(NumError::DimensionMismatch { left: (x.rows(), x.cols()), right: (y.rows(), y.cols()) });
    }
    Ok(inertia(&(y - x), tol)?.n_neg == 0)
}
