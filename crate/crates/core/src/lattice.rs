//! Integer-lattice primitives: primitive scaling, Hermite normal form and
//! kernel sublattices of a single linear functional.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::QVector;

/// Scales a nonzero rational vector to the unique primitive integer vector
/// with the same direction and sign.
pub fn primitive_integer_vector(f: &QVector) -> Result<Vec<BigInt>> {
    if f.is_zero() {
        return Err(Error::ZeroFunctional);
    }
    let lcm = f
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = f
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    Ok(ints.into_iter().map(|x| x / &g).collect())
}

/// Row-style Hermite normal form of an integer matrix.
///
/// Rows are returned in order of increasing pivot column, pivots are
/// positive, entries above a pivot lie in `[0, pivot)`, and zero rows are
/// dropped.
pub fn hermite_normal_form(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let m = a.len();
    let Some(n) = a.first().map(Vec::len) else {
        return a;
    };
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        loop {
            let pivot = (row..m)
                .filter(|&r| !a[r][col].is_zero())
                .min_by(|&x, &y| a[x][col].abs().cmp(&a[y][col].abs()));
            let Some(p) = pivot else { break };
            a.swap(row, p);
            let mut clean = true;
            for r in row + 1..m {
                if a[r][col].is_zero() {
                    continue;
                }
                let q = a[r][col].div_floor(&a[row][col]);
                let (top, rest) = a.split_at_mut(r);
                sub_multiple(&mut rest[0], &top[row], &q);
                if !rest[0][col].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if a[row][col].is_zero() {
            continue;
        }
        if a[row][col].is_negative() {
            for x in a[row].iter_mut() {
                *x = -&*x;
            }
        }
        for r in 0..row {
            let q = a[r][col].div_floor(&a[row][col]);
            if !q.is_zero() {
                let (top, rest) = a.split_at_mut(row);
                sub_multiple(&mut top[r], &rest[0], &q);
            }
        }
        row += 1;
    }
    a.truncate(row);
    a.retain(|r| r.iter().any(|x| !x.is_zero()));
    a
}

fn sub_multiple(target: &mut [BigInt], source: &[BigInt], q: &BigInt) {
    for (t, s) in target.iter_mut().zip(source) {
        *t -= q * s;
    }
}

/// A Z-basis of `{v in Z^n : f . v = 0}` for a nonzero rational functional.
///
/// The basis has `n - 1` vectors and is returned in Hermite normal form
/// (see [`hermite_normal_form`]), so the output is deterministic.
pub fn integer_kernel_basis(f: &QVector) -> Result<Vec<QVector>> {
    Ok(integer_kernel_basis_ints(f)?
        .iter()
        .map(|v| QVector::from_bigints(v))
        .collect())
}

pub(crate) fn integer_kernel_basis_ints(f: &QVector) -> Result<Vec<Vec<BigInt>>> {
    let g = primitive_integer_vector(f)?;
    let n = g.len();
    // Unimodular column operations reduce g to (gcd, 0, ..., 0); the
    // columns that end up under the zeros span the kernel.
    let mut cols: Vec<Vec<BigInt>> = (0..n)
        .map(|j| (0..n).map(|i| BigInt::from((i == j) as u8)).collect())
        .collect();
    let mut head = g.clone();
    for j in 1..n {
        let (a, b) = (head[0].clone(), head[j].clone());
        if b.is_zero() {
            continue;
        }
        let e = a.extended_gcd(&b);
        let (d, x, y) = (e.gcd, e.x, e.y);
        let (p, q) = (&b / &d, &a / &d);
        let c0 = cols[0].clone();
        let cj = cols[j].clone();
        cols[0] = c0.iter().zip(&cj).map(|(u, v)| &x * u + &y * v).collect();
        cols[j] = c0.iter().zip(&cj).map(|(u, v)| -(&p * u) + &q * v).collect();
        head[0] = d;
        head[j] = BigInt::zero();
    }
    let kernel: Vec<Vec<BigInt>> = cols.into_iter().skip(1).collect();
    Ok(hermite_normal_form(&kernel))
}
