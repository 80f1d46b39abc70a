use num_bigint::BigInt;
use rayon::prelude::*;

use crate::diophant::{integer_vectors_of_norm, PosDefForm};
use crate::error::{Error, Result};
use crate::forms::GramForm;
use crate::linalg::{check_dim, QMatrix, QVector};

/// Where the oracle takes candidate columns from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnSource {
    /// All integer vectors of the required norm (complete).
    Enumerated,
    /// Integer vectors with every coordinate in `[-bound, bound]`.
    Box(u32),
}

fn to_ints(rows: &QMatrix) -> Result<Vec<Vec<BigInt>>> {
    rows.to_integer_rows().ok_or(Error::NonIntegralForm)
}

fn box_vectors(n: usize, bound: u32) -> Vec<Vec<BigInt>> {
    let b = bound as i64;
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<BigInt>| {
                (-b..=b).map(move |x| {
                    let mut v = prefix.clone();
                    v.push(BigInt::from(x));
                    v
                })
            })
            .collect();
    }
    out
}

fn apply(g: &[Vec<BigInt>], v: &[BigInt]) -> Vec<BigInt> {
    g.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Column {
    v: Vec<BigInt>,
    gv: Vec<BigInt>,
}

/// Every integral `M` with `Mᵀ B M = B′`, found column by column: column `j`
/// has `B`-norm `B′_jj` and pairs with earlier columns as `B′_ij`. Sorted.
pub fn brute_force_isometries(b: &GramForm, bp: &GramForm, source: ColumnSource) -> Result<Vec<QMatrix>> {
    let n = b.dim();
    check_dim(n, bp.dim())?;
    if !b.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let g = to_ints(b.gram())?;
    let gp = to_ints(bp.gram())?;
    let boxed = match source {
        ColumnSource::Box(bound) => Some(box_vectors(n, bound)),
        ColumnSource::Enumerated => None,
    };
    let q = PosDefForm::new(b.gram().clone())?;
    let columns: Vec<Vec<Column>> = (0..n)
        .map(|j| {
            let target = &gp[j][j];
            let vs = match &boxed {
                Some(all) => all
                    .iter()
                    .filter(|v| &dot(v, &apply(&g, v)) == target)
                    .cloned()
                    .collect(),
                None => integer_vectors_of_norm(&q, target)?,
            };
            Ok(vs
                .into_iter()
                .map(|v| Column {
                    gv: apply(&g, &v),
                    v,
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let Some(first) = columns.first() else {
        return Ok(Vec::new());
    };
    let mut found: Vec<QMatrix> = first
        .par_iter()
        .flat_map_iter(|c0| {
            let mut local = Vec::new();
            let mut chosen = vec![c0];
            extend(&columns, &gp, &mut chosen, &mut local);
            local
        })
        .collect();
    found.retain(QMatrix::is_unimodular);
    found.sort();
    Ok(found)
}

fn extend<'a>(columns: &'a [Vec<Column>], gp: &[Vec<BigInt>], chosen: &mut Vec<&'a Column>, out: &mut Vec<QMatrix>) {
    let j = chosen.len();
    if j == columns.len() {
        let cols: Vec<QVector> = chosen.iter().map(|c| QVector::from_bigints(&c.v)).collect();
        out.push(QMatrix::from_columns(&cols).expect("square"));
        return;
    }
    for cand in &columns[j] {
        if chosen.iter().enumerate().all(|(i, prev)| dot(&prev.gv, &cand.v) == gp[i][j]) {
            chosen.push(cand);
            extend(columns, gp, chosen, out);
            chosen.pop();
        }
    }
}
