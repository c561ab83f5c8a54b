//! Antenna-domain matrix representations used by the statistics pipeline.
//!
//! Every covariance in the model is a real combination of a few fixed Hermitian
//! bases. [`Dense`] stores full `M x M` matrices and works for any bases.
//! [`Spectral`] stores eigenvalues in a shared eigenbasis and is exact whenever all
//! bases commute, which holds when every covariance is a multiple of `R_t`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

pub trait HermitianOp: Clone + Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;
    fn zeros_like(&self) -> Self;
    fn identity_like(&self) -> Self;
    fn scaled(&self, a: f64) -> Self;
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
    fn add(&self, x: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, x);
        out
    }
    fn sub(&self, x: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, x);
        out
    }
    /// Matrix product (not Hermitian in general for [`Dense`]).
    fn mul(&self, x: &Self) -> Self;
    /// `(self + shift I)^-1`; `self` must be PSD and `shift > 0`.
    fn shifted_inverse(&self, shift: f64) -> Result<Self>;
    /// `self (self + shift I)^-1 self`, Hermitian by construction.
    fn filtered(&self, shift: f64) -> Result<Self>;
    /// Real part of the trace.
    fn trace(&self) -> f64;
    /// Real part of `tr(self x)` for Hermitian `x`.
    fn trace_mul(&self, x: &Self) -> f64;
    /// Imaginary residue of the trace, for consistency checks.
    fn trace_imag(&self) -> f64;
    /// Full matrix in the antenna domain.
    fn to_dense(&self) -> DMatrix<C64>;
}

/// Cholesky factor of a Hermitian matrix, rejecting indefinite input. The complex
/// factorization takes square roots of negative pivots silently, so the pivots are checked.
fn positive_cholesky(a: DMatrix<C64>) -> Result<nalgebra::Cholesky<C64, nalgebra::Dyn>> {
    let chol = a.cholesky().ok_or(Error::NotPsd(f64::NAN))?;
    let worst = chol.l_dirty().diagonal().iter().map(|d| if d.im.abs() > 0.0 { -d.norm() } else { d.re }).fold(f64::INFINITY, f64::min);
    if worst <= 0.0 {
        return Err(Error::NotPsd(worst));
    }
    Ok(chol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense(pub DMatrix<C64>);

impl Dense {
    pub fn hermitian_part(&self) -> Self {
        Dense((&self.0 + self.0.adjoint()).scale(0.5))
    }
}

impl HermitianOp for Dense {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn zeros_like(&self) -> Self {
        Dense(DMatrix::zeros(self.dim(), self.dim()))
    }

    fn identity_like(&self) -> Self {
        Dense(DMatrix::identity(self.dim(), self.dim()))
    }

    fn scaled(&self, a: f64) -> Self {
        Dense(self.0.scale(a))
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        self.0.zip_apply(&x.0, |s, v| *s += v * a);
    }

    fn mul(&self, x: &Self) -> Self {
        Dense(&self.0 * &x.0)
    }

    fn shifted_inverse(&self, shift: f64) -> Result<Self> {
        let n = self.dim();
        let a = self.hermitian_part().0 + DMatrix::<C64>::identity(n, n) * C64::new(shift, 0.0);
        Ok(Dense(positive_cholesky(a)?.inverse()))
    }

    fn filtered(&self, shift: f64) -> Result<Self> {
        let n = self.dim();
        let r = self.hermitian_part().0;
        let a = &r + DMatrix::<C64>::identity(n, n) * C64::new(shift, 0.0);
        let x = positive_cholesky(a)?.solve(&r);
        Ok(Dense(&r * x).hermitian_part())
    }

    fn trace(&self) -> f64 {
        self.0.trace().re
    }

    fn trace_mul(&self, x: &Self) -> f64 {
        // tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B
        self.0
            .iter()
            .zip(x.0.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    fn trace_imag(&self) -> f64 {
        self.0.trace().im
    }

    fn to_dense(&self) -> DMatrix<C64> {
        self.0.clone()
    }
}

/// Diagonal representation in a fixed eigenbasis shared through an `Arc`.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub values: DVector<f64>,
    pub basis: std::sync::Arc<DMatrix<C64>>,
}

impl PartialEq for Spectral {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Spectral {
    pub fn new(values: DVector<f64>, basis: std::sync::Arc<DMatrix<C64>>) -> Self {
        Self { values, basis }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.map(f),
            basis: self.basis.clone(),
        }
    }
}

impl HermitianOp for Spectral {
    fn dim(&self) -> usize {
        self.values.len()
    }

    fn zeros_like(&self) -> Self {
        self.map(|_| 0.0)
    }

    fn identity_like(&self) -> Self {
        self.map(|_| 1.0)
    }

    fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        self.values.axpy(a, &x.values, 1.0);
    }

    fn mul(&self, x: &Self) -> Self {
        Self {
            values: self.values.component_mul(&x.values),
            basis: self.basis.clone(),
        }
    }

    fn shifted_inverse(&self, shift: f64) -> Result<Self> {
        if self.values.iter().any(|&v| v + shift <= 0.0) {
            return Err(Error::NotPsd(self.values.min()));
        }
        Ok(self.map(|v| 1.0 / (v + shift)))
    }

    fn filtered(&self, shift: f64) -> Result<Self> {
        if self.values.iter().any(|&v| v + shift <= 0.0) {
            return Err(Error::NotPsd(self.values.min()));
        }
        Ok(self.map(|v| v * v / (v + shift)))
    }

    fn trace(&self) -> f64 {
        self.values.sum()
    }

    fn trace_mul(&self, x: &Self) -> f64 {
        self.values.dot(&x.values)
    }

    fn trace_imag(&self) -> f64 {
        0.0
    }

    fn to_dense(&self) -> DMatrix<C64> {
        let u = &*self.basis;
        let scaled = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * self.values[j]);
        &scaled * u.adjoint()
    }
}
