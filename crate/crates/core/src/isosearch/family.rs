use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::certificate::{Certificate, Detail, Verdict};
use super::problem::IsometryProblem;
use crate::diophant::{three_squares_representable, two_squares_representable};
use crate::error::{Error, Result};
use crate::forms::GramForm;
use crate::linalg::{int_to_rat, QMatrix, QVector};

/// Parametrised pairs of forms with equal determinant whose first anchor
/// equation is a sum of two or three squares.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyParams {
    /// `B = diag(m², n²)`, `B′ = [[α, β], [β, γ]]`, `αγ − β² = (mn)²`, `w = (1,0)`.
    Rank2 {
        m: BigInt,
        n: BigInt,
        alpha: BigInt,
        beta: BigInt,
        gamma: BigInt,
    },
    /// `B = [[2m²+1, −1, 0], [−1, 1, 0], [0, 0, 2m²]]`,
    /// `B′ = diag(4m³, m, 1)`, `w = (1,1,1)`.
    Rank3 { m: BigInt },
    /// The same `B` against `B″ = [[α, β, 0], [β, γ, 0], [0, 0, 1]]` with
    /// `αγ − β² = 4m⁴`.
    Rank3Variant {
        m: BigInt,
        alpha: BigInt,
        beta: BigInt,
        gamma: BigInt,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Squares {
    Two = 2,
    Three = 3,
}

fn bad(msg: String) -> Error {
    Error::BadFamilyParams(msg)
}

impl FamilyParams {
    pub fn validate(&self) -> Result<()> {
        match self {
            FamilyParams::Rank2 {
                m,
                n,
                alpha,
                beta,
                gamma,
            } => {
                if m.is_zero() || n.is_zero() {
                    return Err(bad("m and n must be nonzero".into()));
                }
                let det = alpha * gamma - beta * beta;
                let want = m * m * n * n;
                if det != want {
                    return Err(bad(format!("αγ − β² = {det}, expected (mn)² = {want}")));
                }
            }
            FamilyParams::Rank3 { m } => {
                if m.is_zero() {
                    return Err(bad("m must be nonzero".into()));
                }
            }
            FamilyParams::Rank3Variant {
                m,
                alpha,
                beta,
                gamma,
            } => {
                if m.is_zero() || alpha.is_zero() || beta.is_zero() || gamma.is_zero() {
                    return Err(bad("m, α, β, γ must be nonzero".into()));
                }
                let det = alpha * gamma - beta * beta;
                let want = BigInt::from(4) * m.pow(4);
                if det != want {
                    return Err(bad(format!("αγ − β² = {det}, expected 4m⁴ = {want}")));
                }
            }
        }
        Ok(())
    }

    /// The rank-3 form `B` shared by both rank-3 families.
    fn rank3_base(m: &BigInt) -> Vec<Vec<BigInt>> {
        let two_m2 = BigInt::from(2) * m * m;
        let z = BigInt::zero;
        vec![
            vec![&two_m2 + 1, BigInt::from(-1), z()],
            vec![BigInt::from(-1), BigInt::one(), z()],
            vec![z(), z(), two_m2],
        ]
    }

    /// `(B, B′, w)` as Gram matrices and anchor.
    pub fn forms(&self) -> Result<(Vec<Vec<BigInt>>, Vec<Vec<BigInt>>, Vec<BigInt>)> {
        self.validate()?;
        let z = BigInt::zero;
        let i = |k: i64| BigInt::from(k);
        Ok(match self {
            FamilyParams::Rank2 {
                m,
                n,
                alpha,
                beta,
                gamma,
            } => (
                vec![vec![m * m, z()], vec![z(), n * n]],
                vec![vec![alpha.clone(), beta.clone()], vec![beta.clone(), gamma.clone()]],
                vec![i(1), i(0)],
            ),
            FamilyParams::Rank3 { m } => (
                Self::rank3_base(m),
                vec![
                    vec![i(4) * m.pow(3), z(), z()],
                    vec![z(), m.clone(), z()],
                    vec![z(), z(), i(1)],
                ],
                vec![i(1), i(1), i(1)],
            ),
            FamilyParams::Rank3Variant {
                m,
                alpha,
                beta,
                gamma,
            } => (
                Self::rank3_base(m),
                vec![
                    vec![alpha.clone(), beta.clone(), z()],
                    vec![beta.clone(), gamma.clone(), z()],
                    vec![z(), z(), i(1)],
                ],
                vec![i(1), i(1), i(1)],
            ),
        })
    }

    /// The isometry problem the family describes, with default `z0`.
    pub fn problem(&self) -> Result<IsometryProblem> {
        let (b, bp, w) = self.forms()?;
        let to_q = |rows: &[Vec<BigInt>]| QMatrix::from_fn(rows.len(), |r, c| int_to_rat(&rows[r][c]));
        IsometryProblem::new(
            GramForm::new(to_q(&b))?,
            GramForm::new(to_q(&bp))?,
            QVector::from_bigints(&w),
            None,
        )
    }

    /// `(value, reduced, squares)`: the first-equation constant
    /// `B(w,w)² B′(w,w)`, the factor `B′(w,w)` and how many squares the
    /// equation is a sum of.
    fn constants(&self) -> Result<(BigInt, BigInt, Squares)> {
        self.validate()?;
        Ok(match self {
            FamilyParams::Rank2 { m, alpha, .. } => (alpha * m.pow(4), alpha.clone(), Squares::Two),
            FamilyParams::Rank3 { m } => {
                let reduced = BigInt::from(4) * m.pow(3) + m + 1;
                (BigInt::from(16) * m.pow(4) * &reduced, reduced, Squares::Three)
            }
            FamilyParams::Rank3Variant {
                m,
                alpha,
                beta,
                gamma,
            } => {
                let reduced = alpha + BigInt::from(2) * beta + gamma + 1;
                (BigInt::from(16) * m.pow(4) * &reduced, reduced, Squares::Three)
            }
        })
    }
}

/// Applies the two- or three-squares criterion to the family's first
/// anchor equation. The test is one-sided: representable means
/// [`Verdict::Inconclusive`].
pub fn family_obstruction(params: &FamilyParams) -> Result<Certificate> {
    let (value, reduced, squares) = params.constants()?;
    let equation = match params {
        FamilyParams::Rank2 { m, n, .. } => format!("{value} = ({m}·s)² + ({n}·t)²"),
        FamilyParams::Rank3 { m } | FamilyParams::Rank3Variant { m, .. } => {
            format!("{value} = (2·{m}·s)² + (2·{m}·b₁)² + (b₁ − b₂)²")
        }
    };
    Ok(squares_certificate(value, reduced, squares, equation))
}

/// The bare criterion on `value`.
pub fn squares_obstruction(value: &BigInt, squares: Squares) -> Certificate {
    let terms = match squares {
        Squares::Two => "x² + y²",
        Squares::Three => "x² + y² + z²",
    };
    squares_certificate(value.clone(), value.clone(), squares, format!("{value} = {terms}"))
}

fn squares_certificate(value: BigInt, reduced: BigInt, squares: Squares, equation: String) -> Certificate {
    let representable = match squares {
        Squares::Two => two_squares_representable(&value),
        Squares::Three => three_squares_representable(&value),
    };
    let verdict = match (representable, squares) {
        (true, _) => Verdict::Inconclusive,
        (false, Squares::Two) => Verdict::ObstructionTwoSquares,
        (false, Squares::Three) => Verdict::ObstructionThreeSquares,
    };
    Certificate {
        verdict,
        witness: None,
        detail: Detail::Squares {
            value,
            reduced,
            squares: squares as u8,
            equation,
        },
    }
}

/// Runs the rank-3 family criterion for `m` in `range` (positive `m` only).
/// A finite demonstration; it proves nothing about densities.
pub fn rank3_scan(range: std::ops::RangeInclusive<i64>) -> Vec<(i64, bool)> {
    range
        .filter(|m| *m > 0)
        .map(|m| {
            let obstructed = family_obstruction(&FamilyParams::Rank3 { m: BigInt::from(m) })
                .map(|c| c.verdict == Verdict::ObstructionThreeSquares)
                .unwrap_or(false);
            (m, obstructed)
        })
        .collect()
}

impl FamilyParams {
    pub fn is_definite_instance(&self) -> bool {
        match self {
            FamilyParams::Rank2 { alpha, gamma, .. } => alpha.is_positive() && gamma.is_positive(),
            FamilyParams::Rank3 { m } => m.is_positive(),
            FamilyParams::Rank3Variant { alpha, .. } => alpha.is_positive(),
        }
    }
}
