//! The `(B, w)`-grading of `End(Q^n)`.
//!
//! For a nondegenerate symmetric form `B` and an anisotropic anchor `w`, the
//! even component consists of maps `φ` with `B(u, φw) = B(w, φu) = 0` for all
//! `u ⊥ w`, and the odd component of maps with `B(u, φv) = 0` for all
//! `u, v ⊥ w` together with `B(w, φw) = 0`. The two components are
//! complementary, orthogonal for the trace form, and multiply like a
//! `Z/2`-graded algebra. Even maps carry a weight `B(w, φw) / B(w, w)`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{adjoint, ortho_complement_basis, outer, pullback, Endo, GramForm};
use crate::linalg::{check_dim, QVector, Rational};

/// A form together with an anchor vector and a fixed basis of `{w}^⊥`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedContext {
    form: GramForm,
    anchor: QVector,
    anchor_norm: Rational,
    perp_basis: Vec<QVector>,
}

/// The four-term decomposition
/// `φ = φ₀ + (wt/B(w,w)) φ_{w,w} + φ_{w,a} + φ_{b,w}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedDecomposition {
    /// Weight-zero part of the even component.
    pub phi0: crate::linalg::QMatrix,
    #[serde(with = "crate::isosearch::rational_str")]
    pub weight: Rational,
    pub a: QVector,
    pub b: QVector,
}

impl GradedContext {
    pub fn new(form: GramForm, anchor: QVector) -> Result<Self> {
        check_dim(form.dim(), anchor.len())?;
        if anchor.is_zero() {
            return Err(Error::ZeroVector);
        }
        form.inverse()?;
        let anchor_norm = form.norm(&anchor)?;
        if anchor_norm.is_zero() {
            return Err(Error::IsotropicAnchor);
        }
        let perp_basis = ortho_complement_basis(&form, &anchor)?;
        Ok(GradedContext {
            form,
            anchor,
            anchor_norm,
            perp_basis,
        })
    }

    pub fn form(&self) -> &GramForm {
        &self.form
    }

    pub fn anchor(&self) -> &QVector {
        &self.anchor
    }

    pub fn anchor_norm(&self) -> &Rational {
        &self.anchor_norm
    }

    pub fn perp_basis(&self) -> &[QVector] {
        &self.perp_basis
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    fn b(&self, u: &QVector, v: &QVector) -> Rational {
        self.form.eval(u, v).expect("dimensions checked")
    }

    pub fn is_even(&self, phi: &Endo) -> Result<bool> {
        check_dim(self.dim(), phi.dim())?;
        let w = &self.anchor;
        let phi_w = phi.apply(w)?;
        for u in &self.perp_basis {
            if !self.b(u, &phi_w).is_zero() || !self.b(w, &phi.apply(u)?).is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_odd(&self, phi: &Endo) -> Result<bool> {
        check_dim(self.dim(), phi.dim())?;
        let w = &self.anchor;
        if !self.b(w, &phi.apply(w)?).is_zero() {
            return Ok(false);
        }
        for v in &self.perp_basis {
            let phi_v = phi.apply(v)?;
            if self.perp_basis.iter().any(|u| !self.b(u, &phi_v).is_zero()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `{φ_{w,w}} ∪ {φ_{zᵢ,zⱼ}}`, of size `n² - 2n + 2`.
    pub fn even_basis(&self) -> Vec<Endo> {
        let w = &self.anchor;
        let mut basis = vec![self.outer(w, w)];
        for zi in &self.perp_basis {
            for zj in &self.perp_basis {
                basis.push(self.outer(zi, zj));
            }
        }
        basis
    }

    /// `{φ_{w,zᵢ}} ∪ {φ_{zᵢ,w}}`, of size `2n - 2`.
    pub fn odd_basis(&self) -> Vec<Endo> {
        let w = &self.anchor;
        let mut basis: Vec<Endo> = self.perp_basis.iter().map(|z| self.outer(w, z)).collect();
        basis.extend(self.perp_basis.iter().map(|z| self.outer(z, w)));
        basis
    }

    fn outer(&self, u: &QVector, v: &QVector) -> Endo {
        outer(&self.form, u, v).expect("dimensions checked")
    }

    /// `B(w, φw) / B(w, w)`; only defined on the even component.
    pub fn weight(&self, phi: &Endo) -> Result<Rational> {
        if !self.is_even(phi)? {
            return Err(Error::NotEven);
        }
        Ok(self.raw_weight(phi))
    }

    fn raw_weight(&self, phi: &Endo) -> Rational {
        let w = &self.anchor;
        self.b(w, &phi.apply(w).expect("dimensions checked")) / &self.anchor_norm
    }

    /// Odd-part vectors `(a, b)`: the components of `φ†w` and `φw` orthogonal
    /// to `w`, each divided by `B(w, w)`.
    fn odd_vectors(&self, phi: &Endo) -> Result<(QVector, QVector)> {
        let w = &self.anchor;
        let nw = &self.anchor_norm;
        let project = |image: QVector| -> QVector {
            let along = self.b(w, &image) / nw;
            (&image - &w.scale(&along)).scale(&nw.recip())
        };
        let b = project(phi.apply(w)?);
        let a = project(adjoint(&self.form, phi)?.apply(w)?);
        Ok((a, b))
    }

    /// Splits `φ` into its even and odd components.
    pub fn split(&self, phi: &Endo) -> Result<(Endo, Endo)> {
        check_dim(self.dim(), phi.dim())?;
        let (a, b) = self.odd_vectors(phi)?;
        let odd = self.odd_from(&a, &b);
        let even = phi - &odd;
        Ok((even, odd))
    }

    /// `φ_{w,a} + φ_{b,w}`.
    pub fn odd_from(&self, a: &QVector, b: &QVector) -> Endo {
        let w = &self.anchor;
        &self.outer(w, a) + &self.outer(b, w)
    }

    pub fn full_decomposition(&self, phi: &Endo) -> Result<GradedDecomposition> {
        check_dim(self.dim(), phi.dim())?;
        let (a, b) = self.odd_vectors(phi)?;
        let even = phi - &self.odd_from(&a, &b);
        let weight = self.raw_weight(&even);
        let phi0 = &even - &self.weighted_anchor_term(&weight);
        Ok(GradedDecomposition {
            phi0: phi0.into_mat(),
            weight,
            a,
            b,
        })
    }

    /// `(wt / B(w,w)) φ_{w,w}`.
    pub fn weighted_anchor_term(&self, weight: &Rational) -> Endo {
        let w = &self.anchor;
        self.outer(w, w).scale(&(weight / &self.anchor_norm))
    }

    /// Reassembles `φ` from its four-term decomposition.
    pub fn reassemble(&self, d: &GradedDecomposition) -> Endo {
        let phi0 = Endo::new(d.phi0.clone());
        let even = &phi0 + &self.weighted_anchor_term(&d.weight);
        &even + &self.odd_from(&d.a, &d.b)
    }

    /// Conjugation by an invertible `φ`: returns the context
    /// `(B_φ, φ⁻¹w)` and `φ⁻¹ψφ`, which carries the grading of `self` onto
    /// the grading of the new context.
    pub fn conjugate_transport(&self, phi: &Endo, psi: &Endo) -> Result<(GradedContext, Endo)> {
        check_dim(self.dim(), phi.dim())?;
        check_dim(self.dim(), psi.dim())?;
        let inv = phi.inverse()?;
        let form = pullback(&self.form, phi)?;
        let anchor = inv.apply(&self.anchor)?;
        let ctx = GradedContext::new(form, anchor)?;
        let conj = inv.compose(&psi.compose(phi)?)?;
        Ok((ctx, conj))
    }
}

impl GradedDecomposition {
    pub fn phi0(&self) -> Endo {
        Endo::new(self.phi0.clone())
    }
}
