//! Exact rational vectors and square matrices.
//!
//! Everything here is dense and exact. Scalars are [`Rational`], which keeps
//! numerator and denominator coprime with a positive denominator after every
//! operation. Dimension mismatches in the `std::ops` impls panic; the free
//! functions ([`mat_mul`], [`mat_inverse`], ...) report them as errors.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational scalar in canonical form.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int_to_rat(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let r = Rational::from_str(s).ok()?;
    Some(r)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QVector(Vec<Rational>);

impl QVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        QVector(entries)
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        QVector(entries.iter().map(|&x| rat(x)).collect())
    }

    pub fn from_bigints(entries: &[BigInt]) -> Self {
        QVector(entries.iter().map(int_to_rat).collect())
    }

    pub fn zeros(n: usize) -> Self {
        QVector(vec![Rational::zero(); n])
    }

    /// The `i`-th standard basis vector of length `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![Rational::zero(); n];
        v[i] = Rational::one();
        QVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    /// The entries as integers, if they all are.
    pub fn to_integers(&self) -> Option<Vec<BigInt>> {
        self.0
            .iter()
            .map(|x| x.is_integer().then(|| x.to_integer()))
            .collect()
    }

    pub fn dot(&self, other: &QVector) -> Result<Rational> {
        check_dim(self.len(), other.len())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b))
    }

    pub fn scale(&self, k: &Rational) -> QVector {
        QVector(self.0.iter().map(|x| x * k).collect())
    }

    /// Sign-normalised copy: the first nonzero entry is made positive.
    pub fn sign_canonical(&self) -> QVector {
        match self.0.iter().find(|x| !x.is_zero()) {
            Some(x) if x.is_negative() => -self,
            _ => self.clone(),
        }
    }
}

impl Index<usize> for QVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl fmt::Display for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl<'a> Add<&'a QVector> for &'a QVector {
    type Output = QVector;
    fn add(self, rhs: &QVector) -> QVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        QVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a QVector> for &'a QVector {
    type Output = QVector;
    fn sub(self, rhs: &QVector) -> QVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        QVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &QVector {
    type Output = QVector;
    fn neg(self) -> QVector {
        QVector(self.0.iter().map(|x| -x).collect())
    }
}

/// Dense square matrix over the rationals, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl QMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(QMatrix { n, entries })
    }

    /// Builds a matrix from integer rows. Panics if the rows are not square.
    pub fn from_int_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| rat(x)).collect())
            .collect();
        QMatrix::from_rows(rows).expect("square integer matrix")
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        QMatrix { n, entries }
    }

    /// Matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[QVector]) -> Result<Self> {
        let n = columns.len();
        for c in columns {
            check_dim(n, c.len())?;
        }
        Ok(QMatrix::from_fn(n, |i, j| columns[j][i].clone()))
    }

    pub fn identity(n: usize) -> Self {
        QMatrix::from_fn(n, |i, j| {
            if i == j {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn zero(n: usize) -> Self {
        QMatrix {
            n,
            entries: vec![Rational::zero(); n * n],
        }
    }

    pub fn diagonal(diag: &[Rational]) -> Self {
        let n = diag.len();
        QMatrix::from_fn(n, |i, j| {
            if i == j {
                diag[i].clone()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> QVector {
        QVector(self.entries[i * self.n..(i + 1) * self.n].to_vec())
    }

    pub fn column(&self, j: usize) -> QVector {
        QVector((0..self.n).map(|i| self[(i, j)].clone()).collect())
    }

    pub fn rows(&self) -> Vec<QVector> {
        (0..self.n).map(|i| self.row(i)).collect()
    }

    pub fn columns(&self) -> Vec<QVector> {
        (0..self.n).map(|j| self.column(j)).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn transpose(&self) -> QMatrix {
        QMatrix::from_fn(self.n, |i, j| self[(j, i)].clone())
    }

    pub fn trace(&self) -> Rational {
        (0..self.n).fold(Rational::zero(), |acc, i| acc + &self[(i, i)])
    }

    pub fn scale(&self, k: &Rational) -> QMatrix {
        QMatrix {
            n: self.n,
            entries: self.entries.iter().map(|x| x * k).collect(),
        }
    }

    pub fn mul_vec(&self, v: &QVector) -> Result<QVector> {
        check_dim(self.n, v.len())?;
        Ok(QVector(
            (0..self.n)
                .map(|i| {
                    let row = &self.entries[i * self.n..(i + 1) * self.n];
                    row.iter()
                        .zip(v.iter())
                        .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
                })
                .collect(),
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|x| x.is_integer())
    }

    /// Integral with determinant ±1.
    pub fn is_unimodular(&self) -> bool {
        self.is_integral() && {
            let d = self.determinant();
            d.is_one() || (-d).is_one()
        }
    }

    /// Entries as integer rows, if every entry is an integer.
    pub fn to_integer_rows(&self) -> Option<Vec<Vec<BigInt>>> {
        (0..self.n)
            .map(|i| self.row(i).to_integers())
            .collect()
    }

    /// Exact determinant by Gaussian elimination over the rationals.
    pub fn determinant(&self) -> Rational {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return Rational::zero();
            };
            if p != col {
                for k in 0..n {
                    a.swap(p * n + k, col * n + k);
                }
                det = -det;
            }
            let pivot = a[col * n + col].clone();
            det *= &pivot;
            for r in col + 1..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let factor = &a[r * n + col] / &pivot;
                for k in col..n {
                    let delta = &factor * &a[col * n + k];
                    a[r * n + k] -= delta;
                }
            }
        }
        det
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<QMatrix> {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut inv = QMatrix::identity(n).entries;
        for col in 0..n {
            let p = (col..n)
                .find(|&r| !a[r * n + col].is_zero())
                .ok_or(Error::SingularMatrix)?;
            if p != col {
                for k in 0..n {
                    a.swap(p * n + k, col * n + k);
                    inv.swap(p * n + k, col * n + k);
                }
            }
            let pivot_inv = a[col * n + col].recip();
            for k in 0..n {
                a[col * n + k] *= &pivot_inv;
                inv[col * n + k] *= &pivot_inv;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let factor = a[r * n + col].clone();
                for k in 0..n {
                    let da = &factor * &a[col * n + k];
                    a[r * n + k] -= da;
                    let di = &factor * &inv[col * n + k];
                    inv[r * n + k] -= di;
                }
            }
        }
        Ok(QMatrix { n, entries: inv })
    }

    /// Determinants of the leading `k x k` submatrices, `k = 1..=n`.
    pub fn leading_principal_minors(&self) -> Vec<Rational> {
        (1..=self.n)
            .map(|k| QMatrix::from_fn(k, |i, j| self[(i, j)].clone()).determinant())
            .collect()
    }

    /// Copy with every entry sign-flipped if needed so the first nonzero
    /// entry in row-major order is positive.
    pub fn sign_canonical(&self) -> QMatrix {
        match self.entries.iter().find(|x| !x.is_zero()) {
            Some(x) if x.is_negative() => -self,
            _ => self.clone(),
        }
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.entries[i * self.n + j]
    }
}

impl PartialOrd for QMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QMatrix {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.entries.cmp(&other.entries))
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.entries.iter().map(|x| x.to_string()).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(1);
        for i in 0..self.n {
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:>width$}", cells[i * self.n + j])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

impl<'a> Mul<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        mat_mul(self, rhs).expect("matrix dimension mismatch")
    }
}

impl<'a> Add<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;
    fn add(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        QMatrix {
            n: self.n,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        QMatrix {
            n: self.n,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &QMatrix {
    type Output = QMatrix;
    fn neg(self) -> QMatrix {
        QMatrix {
            n: self.n,
            entries: self.entries.iter().map(|x| -x).collect(),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub fn mat_mul(a: &QMatrix, b: &QMatrix) -> Result<QMatrix> {
    check_dim(a.n, b.n)?;
    let n = a.n;
    let mut entries = vec![Rational::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = &a.entries[i * n + k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..n {
                let bkj = &b.entries[k * n + j];
                if !bkj.is_zero() {
                    entries[i * n + j] += aik * bkj;
                }
            }
        }
    }
    Ok(QMatrix { n, entries })
}

pub fn mat_inverse(a: &QMatrix) -> Result<QMatrix> {
    a.inverse()
}

pub fn determinant(a: &QMatrix) -> Rational {
    a.determinant()
}

pub fn transpose(a: &QMatrix) -> QMatrix {
    a.transpose()
}

pub fn is_integral(a: &QMatrix) -> bool {
    a.is_integral()
}

pub fn is_unimodular(a: &QMatrix) -> bool {
    a.is_unimodular()
}

// Serialized as arrays of "p/q" strings so no precision question arises.

impl Serialize for QVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cells: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        cells.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cells = Vec::<String>::deserialize(d)?;
        cells
            .iter()
            .map(|c| parse_rational(c).ok_or_else(|| D::Error::custom(format!("bad rational {c:?}"))))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(QVector)
    }
}

impl Serialize for QMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for QMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<QVector>::deserialize(d)?;
        QMatrix::from_rows(rows.into_iter().map(QVector::into_entries).collect())
            .map_err(D::Error::custom)
    }
}
