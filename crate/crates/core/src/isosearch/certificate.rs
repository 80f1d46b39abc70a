use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::pipeline::{find_isometries, solve_eq1, CandidateIsometry, SearchOptions};
use super::problem::IsometryProblem;
use crate::diophant::{integer_vectors_of_norm, three_squares_representable, two_squares_representable, PosDefForm};
use crate::linalg::{int_to_rat, QMatrix, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    /// An integral `M` with `Mᵀ B M = B′` is attached.
    IsometricWitness,
    /// The search is complete and no reconstructed candidate is integral.
    NoIntegralIsometry,
    /// The first anchor equation has no integer solution.
    ObstructionEq1,
    /// The first anchor equation reduces to an unrepresentable sum of two squares.
    ObstructionTwoSquares,
    /// The first anchor equation reduces to an unrepresentable sum of three squares.
    ObstructionThreeSquares,
    /// `det B ≠ det B′`.
    DeterminantMismatch,
    /// A one-sided test found no obstruction.
    Inconclusive,
}

impl Verdict {
    /// Whether the verdict asserts that no integral isometry exists.
    pub fn is_negative(self) -> bool {
        !matches!(self, Verdict::IsometricWitness | Verdict::Inconclusive)
    }
}

/// The constants a verdict rests on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Detail {
    Witness,
    DeterminantMismatch {
        #[serde(with = "super::rational_str")]
        det_b: Rational,
        #[serde(with = "super::rational_str")]
        det_bprime: Rational,
    },
    /// `target = anchor_norm · s² + yᵀ G y` has no integer solution `(s, y)`,
    /// where `G` is the Gram matrix of `B` on the kernel lattice basis.
    Eq1 {
        #[serde(with = "super::bigint_str")]
        anchor_norm: BigInt,
        #[serde(with = "super::bigint_str")]
        target: BigInt,
        #[serde(with = "super::bigint_str::matrix")]
        kernel_basis: Vec<Vec<BigInt>>,
        #[serde(with = "super::bigint_str::matrix")]
        kernel_gram: Vec<Vec<BigInt>>,
        equation: String,
    },
    Candidates {
        rational_candidates: usize,
        equation: String,
    },
    /// `value` is (or is not) a sum of `squares` integer squares;
    /// `reduced` is the factor the classical criterion is usually quoted on.
    Squares {
        #[serde(with = "super::bigint_str")]
        value: BigInt,
        #[serde(with = "super::bigint_str")]
        reduced: BigInt,
        squares: u8,
        equation: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub witness: Option<CandidateIsometry>,
    pub detail: Detail,
}

impl Certificate {
    pub fn witness(c: CandidateIsometry) -> Self {
        Certificate {
            verdict: Verdict::IsometricWitness,
            witness: Some(c),
            detail: Detail::Witness,
        }
    }

    pub fn determinant_mismatch(p: &IsometryProblem) -> Self {
        Certificate {
            verdict: Verdict::DeterminantMismatch,
            witness: None,
            detail: Detail::DeterminantMismatch {
                det_b: p.form().determinant().clone(),
                det_bprime: p.target().determinant().clone(),
            },
        }
    }

    pub fn eq1_obstruction(p: &IsometryProblem) -> Self {
        let n = p.anchor_norm().clone();
        let target = p.eq1_target();
        Certificate {
            verdict: Verdict::ObstructionEq1,
            witness: None,
            detail: Detail::Eq1 {
                equation: format!("{target} = {n}·s² + B(b̃,b̃), b̃ ∈ Z^n ∩ {{w}}^⊥"),
                anchor_norm: n,
                target,
                kernel_basis: p.cache.kernel.clone(),
                kernel_gram: p.cache.kernel_gram.clone(),
            },
        }
    }
}

fn squares_hold(value: &BigInt, squares: u8) -> Option<bool> {
    match squares {
        2 => Some(two_squares_representable(value)),
        3 => Some(three_squares_representable(value)),
        _ => None,
    }
}

fn eq1_has_solution(anchor_norm: &BigInt, target: &BigInt, gram: &[Vec<BigInt>]) -> Option<bool> {
    let d = gram.len();
    if gram.iter().any(|r| r.len() != d) || anchor_norm <= &BigInt::from(0) {
        return None;
    }
    let q = PosDefForm::new(QMatrix::from_fn(d, |i, j| int_to_rat(&gram[i][j]))).ok()?;
    if target < &BigInt::from(0) {
        return Some(false);
    }
    let smax = num_integer::Roots::sqrt(&(target / anchor_norm));
    let mut s = -&smax;
    while s <= smax {
        let rest = target - anchor_norm * &s * &s;
        if rest >= BigInt::from(0) && !integer_vectors_of_norm(&q, &rest).ok()?.is_empty() {
            return Some(true);
        }
        s += 1;
    }
    Some(false)
}

/// Checks what can be checked from the certificate alone. `None` when the
/// verdict needs the problem (witnesses, determinant and search verdicts).
pub fn verify_standalone(cert: &Certificate) -> Option<bool> {
    match (&cert.verdict, &cert.detail) {
        (
            Verdict::ObstructionEq1,
            Detail::Eq1 {
                anchor_norm,
                target,
                kernel_gram,
                ..
            },
        ) => eq1_has_solution(anchor_norm, target, kernel_gram).map(|found| !found),
        (Verdict::ObstructionTwoSquares, Detail::Squares { value, squares: 2, .. }) => {
            Some(!two_squares_representable(value))
        }
        (Verdict::ObstructionThreeSquares, Detail::Squares { value, squares: 3, .. }) => {
            Some(!three_squares_representable(value))
        }
        (Verdict::Inconclusive, Detail::Squares { value, squares, .. }) => squares_hold(value, *squares),
        _ => None,
    }
}

/// Re-checks a certificate against a problem: the witness product, the
/// determinants, or the named equation, without trusting stored counts.
pub fn verify_certificate(cert: &Certificate, p: &IsometryProblem) -> bool {
    match cert.verdict {
        Verdict::IsometricWitness => {
            let Some(w) = &cert.witness else { return false };
            let m = &w.matrix;
            if m.dim() != p.dim() || !m.is_unimodular() {
                return false;
            }
            let pulled = &(&m.transpose() * p.form().gram()) * m;
            &pulled == p.target().gram()
        }
        Verdict::DeterminantMismatch => match &cert.detail {
            Detail::DeterminantMismatch { det_b, det_bprime } => {
                det_b == p.form().determinant() && det_bprime == p.target().determinant() && det_b != det_bprime
            }
            _ => false,
        },
        Verdict::ObstructionEq1 => match &cert.detail {
            Detail::Eq1 {
                anchor_norm,
                target,
                kernel_basis,
                kernel_gram,
                ..
            } => {
                anchor_norm == p.anchor_norm()
                    && *target == p.eq1_target()
                    && *kernel_basis == p.cache.kernel
                    && *kernel_gram == p.cache.kernel_gram
                    && verify_standalone(cert) == Some(true)
                    && cert.witness.is_none()
            }
            _ => false,
        },
        Verdict::ObstructionTwoSquares | Verdict::ObstructionThreeSquares => match &cert.detail {
            Detail::Squares { value, .. } => {
                *value == p.eq1_target()
                    && verify_standalone(cert) == Some(true)
                    && solve_eq1(p).map(|r| r.solutions.is_empty()).unwrap_or(false)
            }
            _ => false,
        },
        Verdict::NoIntegralIsometry => {
            if cert.witness.is_some() {
                return false;
            }
            let Ok(outcome) = find_isometries(p, &SearchOptions::default()) else {
                return false;
            };
            let count_matches = match &cert.detail {
                Detail::Candidates {
                    rational_candidates, ..
                } => *rational_candidates == outcome.candidates.len(),
                _ => false,
            };
            count_matches && outcome.certificate.verdict == Verdict::NoIntegralIsometry
        }
        Verdict::Inconclusive => verify_standalone(cert).unwrap_or(false),
    }
}
