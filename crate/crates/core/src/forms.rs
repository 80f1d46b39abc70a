//! Symmetric bilinear forms given by Gram matrices, and the operations on
//! endomorphisms that depend on a form: adjoints, pullbacks, outer products
//! and the trace form.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::integer_kernel_basis;
use crate::linalg::{check_dim, rat, QMatrix, QVector, Rational};

/// A symmetric bilinear form on `Q^n`, stored as its Gram matrix in the
/// standard basis.
///
/// [`GramForm::new`] only accepts nondegenerate forms. Pullbacks along
/// singular maps are still representable and report
/// [`is_degenerate`](GramForm::is_degenerate).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramForm {
    gram: QMatrix,
    det: Rational,
    inverse: Option<QMatrix>,
    positive_definite: bool,
}

impl GramForm {
    pub fn new(gram: QMatrix) -> Result<Self> {
        let form = Self::symmetric(gram)?;
        if form.is_degenerate() {
            return Err(Error::DegenerateForm);
        }
        Ok(form)
    }

    pub fn from_int_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(QMatrix::from_int_rows(rows))
    }

    pub fn diagonal(diag: &[i64]) -> Result<Self> {
        Self::new(QMatrix::diagonal(
            &diag.iter().map(|&x| rat(x)).collect::<Vec<_>>(),
        ))
    }

    pub fn standard(n: usize) -> Result<Self> {
        Self::new(QMatrix::identity(n))
    }

    /// Symmetric, possibly degenerate.
    pub(crate) fn symmetric(gram: QMatrix) -> Result<Self> {
        if gram.dim() < 2 {
            return Err(Error::DimensionTooSmall(gram.dim()));
        }
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let det = gram.determinant();
        let inverse = if det.is_zero() { None } else { gram.inverse().ok() };
        // Sylvester: all leading principal minors positive.
        let positive_definite = gram
            .leading_principal_minors()
            .iter()
            .all(Signed::is_positive);
        Ok(GramForm {
            gram,
            det,
            inverse,
            positive_definite,
        })
    }

    pub fn gram(&self) -> &QMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    pub fn determinant(&self) -> &Rational {
        &self.det
    }

    pub fn is_degenerate(&self) -> bool {
        self.inverse.is_none()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.positive_definite
    }

    pub fn is_integral(&self) -> bool {
        self.gram.is_integral()
    }

    pub fn inverse(&self) -> Result<&QMatrix> {
        self.inverse.as_ref().ok_or(Error::DegenerateForm)
    }

    /// `u^T G v`.
    pub fn eval(&self, u: &QVector, v: &QVector) -> Result<Rational> {
        check_dim(self.dim(), u.len())?;
        u.dot(&self.gram.mul_vec(v)?)
    }

    pub fn norm(&self, v: &QVector) -> Result<Rational> {
        self.eval(v, v)
    }

    /// The functional `v -> B(w, v)` as a coefficient vector.
    pub fn functional(&self, w: &QVector) -> Result<QVector> {
        self.gram.mul_vec(w)
    }
}

/// An endomorphism of `Q^n`, as its matrix in the standard basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Endo(QMatrix);

impl Endo {
    pub fn new(mat: QMatrix) -> Self {
        Endo(mat)
    }

    pub fn identity(n: usize) -> Self {
        Endo(QMatrix::identity(n))
    }

    pub fn zero(n: usize) -> Self {
        Endo(QMatrix::zero(n))
    }

    pub fn mat(&self) -> &QMatrix {
        &self.0
    }

    pub fn into_mat(self) -> QMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn apply(&self, v: &QVector) -> Result<QVector> {
        self.0.mul_vec(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `self . other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Endo) -> Result<Endo> {
        crate::linalg::mat_mul(&self.0, &other.0).map(Endo)
    }

    pub fn scale(&self, k: &Rational) -> Endo {
        Endo(self.0.scale(k))
    }

    pub fn inverse(&self) -> Result<Endo> {
        self.0.inverse().map(Endo)
    }
}

impl<'a> Add<&'a Endo> for &'a Endo {
    type Output = Endo;
    fn add(self, rhs: &Endo) -> Endo {
        Endo(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a Endo> for &'a Endo {
    type Output = Endo;
    fn sub(self, rhs: &Endo) -> Endo {
        Endo(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a Endo> for &'a Endo {
    type Output = Endo;
    fn mul(self, rhs: &Endo) -> Endo {
        Endo(&self.0 * &rhs.0)
    }
}

impl Neg for &Endo {
    type Output = Endo;
    fn neg(self) -> Endo {
        Endo(-&self.0)
    }
}

pub fn eval(b: &GramForm, u: &QVector, v: &QVector) -> Result<Rational> {
    b.eval(u, v)
}

/// A rational basis of `{v : B(w, v) = 0}`.
///
/// With `p` the first index where `Gw` is nonzero, the basis is
/// `e_j - (f_j / f_p) e_p` for `j != p`, in increasing `j`.
pub fn ortho_complement_basis(b: &GramForm, w: &QVector) -> Result<Vec<QVector>> {
    check_dim(b.dim(), w.len())?;
    if w.is_zero() {
        return Err(Error::ZeroVector);
    }
    let f = b.functional(w)?;
    let n = f.len();
    let p = f
        .iter()
        .position(|x| !x.is_zero())
        .ok_or(Error::ZeroVector)?;
    Ok((0..n)
        .filter(|&j| j != p)
        .map(|j| {
            let mut v = vec![Rational::zero(); n];
            v[j] = Rational::one();
            v[p] = -(&f[j] / &f[p]);
            QVector::new(v)
        })
        .collect())
}

/// A Z-basis of `Z^n ∩ {w}^⊥`, in Hermite normal form.
pub fn ortho_complement_lattice_basis(b: &GramForm, w: &QVector) -> Result<Vec<QVector>> {
    check_dim(b.dim(), w.len())?;
    if w.is_zero() {
        return Err(Error::ZeroVector);
    }
    integer_kernel_basis(&b.functional(w)?)
}

/// `G^{-1} M^T G`.
pub fn adjoint(b: &GramForm, phi: &Endo) -> Result<Endo> {
    check_dim(b.dim(), phi.dim())?;
    let inv = b.inverse()?;
    Ok(Endo(&(inv * &phi.0.transpose()) * b.gram()))
}

/// `Tr(phi1^† phi2)`.
pub fn trace_form(b: &GramForm, phi1: &Endo, phi2: &Endo) -> Result<Rational> {
    check_dim(b.dim(), phi2.dim())?;
    let adj = adjoint(b, phi1)?;
    Ok(adj.compose(phi2)?.0.trace())
}

/// The form `B_φ(x, y) = B(φx, φy)`, Gram matrix `M^T G M`. Degenerate when
/// `φ` is singular.
pub fn pullback(b: &GramForm, phi: &Endo) -> Result<GramForm> {
    check_dim(b.dim(), phi.dim())?;
    GramForm::symmetric(&(&phi.0.transpose() * b.gram()) * &phi.0)
}

/// `½(B(φ1 x, φ2 y) + B(φ1 y, φ2 x))`.
pub fn polarized_pullback(b: &GramForm, phi1: &Endo, phi2: &Endo) -> Result<GramForm> {
    check_dim(b.dim(), phi1.dim())?;
    check_dim(b.dim(), phi2.dim())?;
    let mixed = &(&phi1.0.transpose() * b.gram()) * &phi2.0;
    let sym = (&mixed + &mixed.transpose()).scale(&crate::linalg::ratio(1, 2));
    GramForm::symmetric(sym)
}

/// `φ_{B,u,v}(x) = B(v, x) u`, with matrix `u v^T G`.
pub fn outer(b: &GramForm, u: &QVector, v: &QVector) -> Result<Endo> {
    check_dim(b.dim(), u.len())?;
    let gv = b.functional(v)?;
    Ok(Endo(QMatrix::from_fn(b.dim(), |i, j| &u[i] * &gv[j])))
}

/// Whether `v` lies in the dual of `Z^n`, i.e. `Gv` is integral.
pub fn dual_membership(b: &GramForm, v: &QVector) -> Result<bool> {
    if !b.is_integral() {
        return Err(Error::NonIntegralForm);
    }
    Ok(b.functional(v)?.is_integral())
}
