//! Dense complex matrices and validated full-space operators.

use super::RegisterLayout;
use crate::error::{Error, Result};
use crate::num::Real;
use num_complex::Complex;

/// Dense row-major square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    a: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.a[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.a[r * self.n + c] = v;
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if aik.re == T::zero() && aik.im == T::zero() {
                    continue;
                }
                let row = &rhs.a[k * n..(k + 1) * n];
                let dst = &mut out.a[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += aik * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.n, v.len(), "vector length mismatch");
        let n = self.n;
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.a[i * n..(i + 1) * n];
            let mut acc = Complex::new(T::zero(), T::zero());
            for (&m, &x) in row.iter().zip(v) {
                acc += m * x;
            }
            *o = acc;
        }
        out
    }

    pub fn dagger(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.a[c * n + r] = self.a[r * n + c].conj();
            }
        }
        out
    }

    pub fn negate(mut self) -> Self {
        for v in &mut self.a {
            *v = -*v;
        }
        self
    }

    /// `max |(M M†)_{rc} − δ_{rc}|`.
    pub fn unitarity_deviation(&self) -> T {
        let prod = self.mul(&self.dagger());
        let mut dev = T::zero();
        for r in 0..self.n {
            for c in 0..self.n {
                let want = if r == c { T::one() } else { T::zero() };
                let e = prod.get(r, c);
                dev = dev.max((e.re - want).abs().max(e.im.abs()));
            }
        }
        dev
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        self.a
            .iter()
            .zip(&other.a)
            .map(|(x, y)| (x.re - y.re).abs().max((x.im - y.im).abs()))
            .fold(T::zero(), T::max)
    }
}

/// A unitary on the full composite space of a register.
///
/// Construction through [`MatrixOp::new`] checks unitarity against
/// [`Real::op_unitary_tol`]; internal builders that compose already
/// validated unitaries skip the quadratic re-check.
#[derive(Clone, Debug)]
pub struct MatrixOp<T> {
    layout: RegisterLayout,
    mat: CMatrix<T>,
}

impl<T: Real> MatrixOp<T> {
    pub fn new(layout: RegisterLayout, mat: CMatrix<T>) -> Result<Self> {
        if mat.dim() != layout.total_dim() {
            return Err(Error::Layout(format!(
                "matrix dimension {} does not match register dimension {}",
                mat.dim(),
                layout.total_dim()
            )));
        }
        let dev = mat.unitarity_deviation();
        let tol = T::op_unitary_tol();
        if dev > tol {
            return Err(Error::NonUnitary {
                deviation: dev.as_f64(),
                tol: tol.as_f64(),
            });
        }
        Ok(Self { layout, mat })
    }

    pub(crate) fn unchecked(layout: RegisterLayout, mat: CMatrix<T>) -> Self {
        debug_assert_eq!(mat.dim(), layout.total_dim());
        Self { layout, mat }
    }

    pub fn identity(layout: RegisterLayout) -> Self {
        let mat = CMatrix::identity(layout.total_dim());
        Self { layout, mat }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    /// Matrix product `self · rhs` (apply `rhs` first, then `self`).
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.layout != rhs.layout {
            return Err(Error::Layout("operator layouts differ".into()));
        }
        Ok(Self::unchecked(self.layout.clone(), self.mat.mul(&rhs.mat)))
    }

    pub fn dagger(&self) -> Self {
        Self::unchecked(self.layout.clone(), self.mat.dagger())
    }

    pub fn square(&self) -> Self {
        Self::unchecked(self.layout.clone(), self.mat.mul(&self.mat))
    }

    pub fn negate(self) -> Self {
        Self {
            layout: self.layout,
            mat: self.mat.negate(),
        }
    }

    pub fn unitarity_deviation(&self) -> T {
        self.mat.unitarity_deviation()
    }
}
