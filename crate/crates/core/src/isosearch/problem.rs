use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::diophant::PosDefForm;
use crate::error::{Error, Result};
use crate::forms::GramForm;
use crate::lattice::integer_kernel_basis_ints;
use crate::linalg::{check_dim, int_to_rat, QMatrix, QVector, Rational};

/// Decide whether `B′ = Mᵀ B M` for some `M ∈ GL_n(Z)`, searching through the
/// integral equations attached to an anchor `w ∈ Z^n`.
#[derive(Clone, Debug)]
pub struct IsometryProblem {
    form: GramForm,
    target: GramForm,
    anchor: QVector,
    z0: Vec<QVector>,
    pub(crate) cache: AnchorCache,
}

/// Integer data derived once from `(B, w, z0)`.
#[derive(Clone, Debug)]
pub(crate) struct AnchorCache {
    /// `B(w, w)`.
    pub anchor_norm: BigInt,
    /// Z-basis of `Z^n ∩ {w}^⊥`.
    pub kernel: Vec<Vec<BigInt>>,
    /// Gram matrix of `B` on `kernel`, integer entries.
    pub kernel_gram: Vec<Vec<BigInt>>,
    /// Same Gram matrix as a definite form, when `B` is positive definite.
    pub kernel_form: Option<PosDefForm>,
    /// Inverse of the matrix with rows `Gw, Gz0_1, ...`, used to recover `ã`
    /// from its pairings.
    pub pairing_inverse: QMatrix,
    /// Inverse of the matrix with columns `w, z0_1, ...`.
    pub basis_inverse: QMatrix,
    /// Per z0: `B(w,w)⁴ B′(z,z)`, `B(w,w)³ B′(w,z)` and `B(z0, w)`.
    pub z0_data: Vec<Z0Data>,
    /// `B(w,w)⁴ B′(zᵢ, zⱼ)`.
    pub cross: Vec<Vec<BigInt>>,
}

#[derive(Clone, Debug)]
pub(crate) struct Z0Data {
    pub eq3_target: BigInt,
    pub eq2_target: BigInt,
    pub pairing_with_anchor: Rational,
}

impl IsometryProblem {
    /// `z0` defaults to [`default_z0`].
    pub fn new(form: GramForm, target: GramForm, anchor: QVector, z0: Option<Vec<QVector>>) -> Result<Self> {
        let n = form.dim();
        check_dim(n, target.dim())?;
        check_dim(n, anchor.len())?;
        if !form.is_integral() || !target.is_integral() {
            return Err(Error::NonIntegralForm);
        }
        if !anchor.is_integral() {
            return Err(Error::NonIntegralVector);
        }
        if anchor.is_zero() {
            return Err(Error::ZeroVector);
        }
        if form.norm(&anchor)?.is_zero() {
            return Err(Error::IsotropicAnchor);
        }
        let z0 = match z0 {
            Some(z0) => z0,
            None => default_z0(&anchor),
        };
        if z0.len() != n - 1 {
            return Err(Error::DegenerateZ0(format!(
                "expected {} vectors, found {}",
                n - 1,
                z0.len()
            )));
        }
        for z in &z0 {
            check_dim(n, z.len())?;
            if !z.is_integral() {
                return Err(Error::NonIntegralVector);
            }
        }
        let cache = AnchorCache::build(&form, &target, &anchor, &z0)?;
        Ok(IsometryProblem {
            form,
            target,
            anchor,
            z0,
            cache,
        })
    }

    pub fn form(&self) -> &GramForm {
        &self.form
    }

    pub fn target(&self) -> &GramForm {
        &self.target
    }

    pub fn anchor(&self) -> &QVector {
        &self.anchor
    }

    pub fn z0(&self) -> &[QVector] {
        &self.z0
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn anchor_norm(&self) -> &BigInt {
        &self.cache.anchor_norm
    }

    /// Equal determinants are necessary for isometry.
    pub fn determinants_match(&self) -> bool {
        self.form.determinant() == self.target.determinant()
    }

    /// The kernel lattice `Z^n ∩ {w}^⊥` basis used for `b̃` and `φ̃₀(z0)`.
    pub fn kernel_basis(&self) -> Vec<QVector> {
        self.cache.kernel.iter().map(|v| QVector::from_bigints(v)).collect()
    }

    pub(crate) fn kernel_form(&self) -> Result<&PosDefForm> {
        self.cache
            .kernel_form
            .as_ref()
            .ok_or(Error::NotPositiveDefinite)
    }

    pub(crate) fn require_definite(&self) -> Result<()> {
        if self.form.is_positive_definite() {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite)
        }
    }

    /// `B(w,w)² B′(w,w)`.
    pub fn eq1_target(&self) -> BigInt {
        let n = &self.cache.anchor_norm;
        n * n * self.target_anchor_norm()
    }

    /// `B′(w,w)`.
    pub fn target_anchor_norm(&self) -> BigInt {
        self.target
            .norm(&self.anchor)
            .expect("dimensions checked")
            .to_integer()
    }
}

impl AnchorCache {
    fn build(form: &GramForm, target: &GramForm, w: &QVector, z0: &[QVector]) -> Result<Self> {
        let n = form.dim();
        let b = |u: &QVector, v: &QVector| form.eval(u, v).expect("dimensions checked");
        let bp = |u: &QVector, v: &QVector| target.eval(u, v).expect("dimensions checked");
        let nw = b(w, w);
        let anchor_norm = nw.to_integer();

        let mut columns = vec![w.clone()];
        columns.extend(z0.iter().cloned());
        let basis = QMatrix::from_columns(&columns)?;
        let basis_inverse = basis.inverse().map_err(|_| {
            Error::DegenerateZ0("anchor and z0 vectors are linearly dependent".into())
        })?;
        let pairing_rows: Vec<Vec<Rational>> = columns
            .iter()
            .map(|c| form.functional(c).map(QVector::into_entries))
            .collect::<Result<_>>()?;
        let pairing_inverse = QMatrix::from_rows(pairing_rows)?.inverse()?;

        let kernel = integer_kernel_basis_ints(&form.functional(w)?)?;
        let kernel_q: Vec<QVector> = kernel.iter().map(|v| QVector::from_bigints(v)).collect();
        let kernel_gram: Vec<Vec<BigInt>> = kernel_q
            .iter()
            .map(|u| kernel_q.iter().map(|v| b(u, v).to_integer()).collect())
            .collect();
        let kernel_form = if form.is_positive_definite() {
            let g = QMatrix::from_fn(n - 1, |i, j| int_to_rat(&kernel_gram[i][j]));
            Some(PosDefForm::new(g)?)
        } else {
            None
        };

        let perp: Vec<QVector> = z0
            .iter()
            .map(|z| perp_part(form, w, z))
            .collect::<Result<_>>()?;
        let z0_data = z0
            .iter()
            .zip(&perp)
            .map(|(z, zp)| z0_constants(form, target, w, z, zp))
            .collect();
        let n2 = &nw * &nw;
        let n4 = &n2 * &n2;
        let cross = perp
            .iter()
            .map(|u| perp.iter().map(|v| exact_integer(&n4 * bp(u, v))).collect())
            .collect();
        Ok(AnchorCache {
            anchor_norm,
            kernel,
            kernel_gram,
            kernel_form,
            pairing_inverse,
            basis_inverse,
            z0_data,
            cross,
        })
    }
}

/// `z0 - (B(z0, w) / B(w, w)) w`, rejected when it vanishes.
pub(crate) fn perp_part(form: &GramForm, w: &QVector, z0: &QVector) -> Result<QVector> {
    check_dim(form.dim(), z0.len())?;
    let along = form.eval(z0, w)? / form.norm(w)?;
    let zp = z0 - &w.scale(&along);
    if zp.is_zero() {
        Err(Error::DegenerateZ0(format!("{z0} is a multiple of the anchor")))
    } else {
        Ok(zp)
    }
}

pub(crate) fn z0_constants(form: &GramForm, target: &GramForm, w: &QVector, z0: &QVector, zp: &QVector) -> Z0Data {
    let nw = form.norm(w).expect("dimensions checked");
    let n3 = &nw * &nw * &nw;
    let n4 = &n3 * &nw;
    let bp = |u: &QVector, v: &QVector| target.eval(u, v).expect("dimensions checked");
    Z0Data {
        eq3_target: exact_integer(n4 * bp(zp, zp)),
        eq2_target: exact_integer(n3 * bp(w, zp)),
        pairing_with_anchor: form.eval(z0, w).expect("dimensions checked"),
    }
}

fn exact_integer(r: Rational) -> BigInt {
    debug_assert!(r.is_integer(), "expected an integer, found {r}");
    r.to_integer()
}

/// The `n - 1` standard basis vectors other than `e_k`, where `k` is the
/// first index maximising `|w_k|`. Together with `w` they span `Q^n`.
pub fn default_z0(anchor: &QVector) -> Vec<QVector> {
    let n = anchor.len();
    let mut drop = 0;
    for i in 1..n {
        if anchor[i].abs() > anchor[drop].abs() {
            drop = i;
        }
    }
    (0..n).filter(|&i| i != drop).map(|i| QVector::unit(n, i)).collect()
}

/// Suggested anchor: the standard basis vector with the smallest `B(eᵢ, eᵢ)`
/// (first on ties). Small anchor norms keep the equations small.
pub fn suggest_anchor(form: &GramForm) -> QVector {
    let n = form.dim();
    let g = form.gram();
    let best = (0..n)
        .filter(|&i| !g[(i, i)].is_zero())
        .min_by(|&i, &j| g[(i, i)].abs().cmp(&g[(j, j)].abs()).then(i.cmp(&j)))
        .unwrap_or(0);
    QVector::unit(n, best)
}
