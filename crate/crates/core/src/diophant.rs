//! Integer solutions of definite norm equations, plus the classical
//! sums-of-two/three-squares tests.
//!
//! Enumeration uses the exact `G = Uᵀ D U` factorisation of the Gram matrix
//! (`U` unit upper triangular), so that
//! `xᵀ G x = Σ dᵢ (xᵢ + Σ_{j>i} μᵢⱼ xⱼ)²` and the coordinates can be fixed
//! from the last one down with exact rational interval bounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{check_dim, int_to_rat, QMatrix, QVector, Rational};

/// A positive definite form with its cached `Uᵀ D U` factorisation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosDefForm {
    gram: QMatrix,
    pivots: Vec<Rational>,
    // mu[i][j] for j > i; entries at j <= i are unused.
    mu: Vec<Vec<Rational>>,
}

impl PosDefForm {
    pub fn new(gram: QMatrix) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let d = gram.dim();
        let mut pivots: Vec<Rational> = Vec::with_capacity(d);
        let mut mu = vec![vec![Rational::zero(); d]; d];
        for i in 0..d {
            let mut di = gram[(i, i)].clone();
            for k in 0..i {
                di -= &pivots[k] * &mu[k][i] * &mu[k][i];
            }
            // leading minor i+1 equals the product of the first i+1 pivots
            if !di.is_positive() {
                return Err(Error::NotPositiveDefinite);
            }
            for j in i + 1..d {
                let mut s = gram[(i, j)].clone();
                for k in 0..i {
                    s -= &pivots[k] * &mu[k][i] * &mu[k][j];
                }
                mu[i][j] = s / &di;
            }
            pivots.push(di);
        }
        Ok(PosDefForm { gram, pivots, mu })
    }

    pub fn from_int_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(QMatrix::from_int_rows(rows))
    }

    pub fn gram(&self) -> &QMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    /// Diagonal of `D`.
    pub fn pivots(&self) -> &[Rational] {
        &self.pivots
    }

    pub fn norm(&self, v: &QVector) -> Result<Rational> {
        check_dim(self.dim(), v.len())?;
        v.dot(&self.gram.mul_vec(v)?)
    }
}

/// All integer vectors of a given norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormSolutionSet {
    pub target: BigInt,
    /// Sorted lexicographically.
    pub solutions: Vec<QVector>,
    /// Whether `±v` pairs were reduced to one representative.
    pub canonicalized: bool,
}

impl NormSolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Keeps one of each `±v`: the one whose first nonzero entry is positive.
    pub fn canonical(&self) -> NormSolutionSet {
        let solutions = self
            .solutions
            .iter()
            .filter(|v| v.sign_canonical() == **v)
            .cloned()
            .collect();
        NormSolutionSet {
            target: self.target.clone(),
            solutions,
            canonicalized: true,
        }
    }
}

/// Every `v ∈ Z^d` with `vᵀ Q v = target`, in lexicographic order, sign
/// pairs included.
pub fn vectors_of_norm(q: &PosDefForm, target: &BigInt) -> Result<NormSolutionSet> {
    let solutions = integer_vectors_of_norm(q, target)?
        .iter()
        .map(|v| QVector::from_bigints(v))
        .collect();
    Ok(NormSolutionSet {
        target: target.clone(),
        solutions,
        canonicalized: false,
    })
}

/// [`vectors_of_norm`] over plain integer coordinates.
pub fn integer_vectors_of_norm(q: &PosDefForm, target: &BigInt) -> Result<Vec<Vec<BigInt>>> {
    if target.is_negative() {
        return Err(Error::NegativeTarget(target.to_string()));
    }
    let d = q.dim();
    if d == 0 {
        return Ok(if target.is_zero() { vec![vec![]] } else { vec![] });
    }
    let budget = int_to_rat(target);
    let top = d - 1;
    // The top coordinate has center 0; its range is split across workers.
    let candidates = level_range(&q.pivots[top], &Rational::zero(), &budget);
    let mut out: Vec<Vec<BigInt>> = if top == 0 {
        let mut x = vec![BigInt::zero(); 1];
        let mut out = Vec::new();
        enumerate(q, 0, &budget, &mut x, &mut out);
        out
    } else {
        candidates
            .into_par_iter()
            .flat_map_iter(|(xt, rest)| {
                let mut x = vec![BigInt::zero(); d];
                x[top] = xt;
                let mut out = Vec::new();
                enumerate(q, top - 1, &rest, &mut x, &mut out);
                out
            })
            .collect()
    };
    out.sort();
    Ok(out)
}

/// Integers `x` with `p (x - c)² <= budget`, paired with the remaining budget.
fn level_range(p: &Rational, c: &Rational, budget: &Rational) -> Vec<(BigInt, Rational)> {
    if budget.is_negative() {
        return Vec::new();
    }
    let ratio = budget / p;
    let s = floor_sqrt(&ratio.floor().to_integer());
    let lo = c.floor().to_integer() - &s - 1;
    let hi = c.ceil().to_integer() + &s + 1;
    let mut out = Vec::new();
    let mut x = lo;
    while x <= hi {
        let diff = int_to_rat(&x) - c;
        let used = p * &diff * &diff;
        if used <= *budget {
            out.push((x.clone(), budget - used));
        }
        x += 1;
    }
    out
}

fn center(q: &PosDefForm, level: usize, x: &[BigInt]) -> Rational {
    let mut c = Rational::zero();
    for j in level + 1..q.dim() {
        if !x[j].is_zero() {
            c -= &q.mu[level][j] * int_to_rat(&x[j]);
        }
    }
    c
}

fn enumerate(q: &PosDefForm, level: usize, budget: &Rational, x: &mut [BigInt], out: &mut Vec<Vec<BigInt>>) {
    let c = center(q, level, x);
    if level == 0 {
        // Solve p (x - c)² = budget exactly.
        let r2 = budget / &q.pivots[0];
        let Some(r) = rational_sqrt(&r2) else { return };
        let mut roots = vec![&c - &r];
        if !r.is_zero() {
            roots.push(&c + &r);
        }
        for root in roots {
            if root.is_integer() {
                x[0] = root.to_integer();
                out.push(x.to_vec());
            }
        }
        return;
    }
    for (xi, rest) in level_range(&q.pivots[level], &c, budget) {
        x[level] = xi;
        enumerate(q, level - 1, &rest, x, out);
    }
    x[level] = BigInt::zero();
}

fn floor_sqrt(n: &BigInt) -> BigInt {
    if n.is_negative() {
        BigInt::zero()
    } else {
        n.sqrt()
    }
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| Rational::new(sn, sd))
}

/// Prime factorisation by trial division, as `(p, exponent)` pairs.
fn factor(n: &BigInt) -> Vec<(BigInt, u32)> {
    if let Some(small) = n.to_u64() {
        return factor_u64(small)
            .into_iter()
            .map(|(p, e)| (BigInt::from(p), e))
            .collect();
    }
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += 1;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Whether `n = x² + y²` has an integer solution: every prime `≡ 3 (mod 4)`
/// must divide `n` to an even power.
pub fn two_squares_representable(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    if n.is_zero() {
        return true;
    }
    let three = BigInt::from(3);
    let four = BigInt::from(4);
    factor(n)
        .iter()
        .all(|(p, e)| p.mod_floor(&four) != three || e % 2 == 0)
}

/// Whether `n = x² + y² + z²` has an integer solution, i.e. `n` is not of
/// the form `4^t (8k + 7)`.
pub fn three_squares_representable(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    if n.is_zero() {
        return true;
    }
    let mut m = n.clone();
    let four = BigInt::from(4);
    while (&m % &four).is_zero() {
        m /= &four;
    }
    m.mod_floor(&BigInt::from(8)) != BigInt::from(7)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn zero_norm() {
        let q = PosDefForm::from_int_rows(&[[1, 0], [0, 1]]).unwrap();
        let s = vectors_of_norm(&q, &big(0)).unwrap();
        assert_eq!(s.solutions, vec![QVector::from_ints(&[0, 0])]);
    }

    #[test]
    fn rank4_example_counts() {
        let q = PosDefForm::from_int_rows(&[[6, 0, 0, 0], [0, 2, 0, 0], [0, 0, 4, 0], [0, 0, 0, 2]]).unwrap();
        let s = vectors_of_norm(&q, &big(8)).unwrap();
        assert_eq!(s.len(), 20);
        assert_eq!(s.canonical().len(), 10);
        // the same counts by a box search over |v_i| <= 2
        let mut count = 0;
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                for c in -2i64..=2 {
                    for d in -2i64..=2 {
                        if 6 * a * a + 2 * b * b + 4 * c * c + 2 * d * d == 8 {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count, 20);
    }

    #[test]
    fn unrepresentable_norm() {
        let q = PosDefForm::from_int_rows(&[[1, 0], [0, 5]]).unwrap();
        assert!(vectors_of_norm(&q, &big(2)).unwrap().is_empty());
    }

    #[test]
    fn errors() {
        let q = PosDefForm::from_int_rows(&[[1, 0], [0, 5]]).unwrap();
        assert!(matches!(vectors_of_norm(&q, &big(-1)), Err(Error::NegativeTarget(_))));
        assert_eq!(
            PosDefForm::from_int_rows(&[[1, 2], [2, 1]]),
            Err(Error::NotPositiveDefinite)
        );
        assert_eq!(
            PosDefForm::from_int_rows(&[[1, 1], [1, 1]]),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn one_dimensional() {
        let q = PosDefForm::new(QMatrix::diagonal(&[rat(3)])).unwrap();
        let s = vectors_of_norm(&q, &big(12)).unwrap();
        assert_eq!(
            s.solutions,
            vec![QVector::from_ints(&[-2]), QVector::from_ints(&[2])]
        );
    }

    /// Naive box search with the per-coordinate bound `x_i² <= c (G⁻¹)_ii`,
    /// the maximum of `x_i` on the ellipsoid `xᵀ G x = c`.
    fn box_search(gram: &[Vec<i64>], c: i64, inverse: &QMatrix) -> Vec<Vec<BigInt>> {
        let d = gram.len();
        let widest = (0..d)
            .map(|i| (rat(c) * &inverse[(i, i)]).floor().to_integer())
            .max()
            .unwrap();
        let bound = widest.sqrt().to_i64().unwrap() + 1;
        let mut out = Vec::new();
        let mut x = vec![-bound; d];
        loop {
            let mut norm = 0;
            for i in 0..d {
                for j in 0..d {
                    norm += x[i] * gram[i][j] * x[j];
                }
            }
            if norm == c {
                out.push(x.iter().map(|&v| big(v)).collect());
            }
            let mut i = 0;
            while i < d && x[i] == bound {
                x[i] = -bound;
                i += 1;
            }
            if i == d {
                break;
            }
            x[i] += 1;
        }
        out.sort();
        out
    }

    #[test]
    fn matches_box_search_and_is_symmetric() {
        let mut rng = StdRng::seed_from_u64(21);
        let mut done = 0;
        while done < 60 {
            let d = rng.gen_range(1..=4);
            let mut g = vec![vec![0i64; d]; d];
            for i in 0..d {
                for j in i..d {
                    let v = if i == j { rng.gen_range(1..=6) } else { rng.gen_range(-3..=3) };
                    g[i][j] = v;
                    g[j][i] = v;
                }
            }
            let Ok(q) = PosDefForm::from_int_rows(&g) else { continue };
            let c = rng.gen_range(0..=30);
            let got = integer_vectors_of_norm(&q, &big(c)).unwrap();
            let inverse = q.gram().inverse().unwrap();
            assert_eq!(got, box_search(&g, c, &inverse), "gram {g:?} c {c}");
            for v in &got {
                let neg: Vec<BigInt> = v.iter().map(|x| -x).collect();
                assert!(got.binary_search(&neg).is_ok());
            }
            done += 1;
        }
    }

    fn exhaustive_squares(n: u64, k: usize) -> bool {
        let r = (n as f64).sqrt() as u64 + 1;
        match k {
            2 => (0..=r).any(|x| (x..=r).any(|y| x * x + y * y == n)),
            _ => (0..=r).any(|x| (x..=r).any(|y| (y..=r).any(|z| x * x + y * y + z * z == n))),
        }
    }

    #[test]
    fn squares_examples() {
        assert!(two_squares_representable(&big(2)));
        assert!(!two_squares_representable(&big(28)));
        assert!(two_squares_representable(&big(25)));
        assert!(!three_squares_representable(&big(7)));
        assert!(!three_squares_representable(&big(28)));
        assert!(!three_squares_representable(&big(36288)));
        assert_eq!(36288, 16 * 81 * 28);
        assert!(three_squares_representable(&big(6)));
    }

    #[test]
    fn squares_match_exhaustive_small() {
        for n in 0..=600u64 {
            assert_eq!(two_squares_representable(&BigInt::from(n)), exhaustive_squares(n, 2), "{n}");
            assert_eq!(three_squares_representable(&BigInt::from(n)), exhaustive_squares(n, 3), "{n}");
        }
    }

    #[test]
    fn trial_division_paths() {
        // 1000003 is a prime ≡ 3 (mod 4)
        let p = BigInt::from(1_000_003u64);
        let n = &p * 147;
        assert!(!two_squares_representable(&n));
        assert!(two_squares_representable(&(&n * &n)));
        // beyond u64: 2^70 * 3 and 2^70 * 9
        let big2 = BigInt::one() << 70;
        assert!(!two_squares_representable(&(&big2 * 3)));
        assert!(two_squares_representable(&(&big2 * 9)));
    }
}
