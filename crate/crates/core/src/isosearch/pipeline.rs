use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certificate::{Certificate, Detail, Verdict};
use super::problem::{perp_part, z0_constants, IsometryProblem, Z0Data};
use crate::diophant::integer_vectors_of_norm;
use crate::error::Result;
use crate::forms::dual_membership;
use crate::linalg::{int_to_rat, QMatrix, QVector, Rational};

/// A solution `(s, b̃)` of `B(w,w)² B′(w,w) = B(w,w) s² + B(b̃, b̃)` with
/// `b̃ ∈ Z^n ∩ {w}^⊥`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eq1Solution {
    /// `B(w, φ(w))`.
    pub s: BigInt,
    /// `B(w,w)² b`.
    pub btilde: QVector,
    coords: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eq1Report {
    /// Sign-complete, ordered by `s` then by kernel coordinates.
    pub solutions: Vec<Eq1Solution>,
    /// Solutions up to the simultaneous sign change `(s, b̃) -> (-s, -b̃)`.
    pub canonical_count: usize,
}

/// A solution `(t, c)` of `B(w,w)⁴ B′(z,z) = B(c, c) + B(w,w) t²` with
/// `c ∈ Z^n ∩ {w}^⊥`, for one choice of `z0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eq3Solution {
    /// `B(ã, z0)`.
    pub t: BigInt,
    /// `φ̃₀(z0) = B(w,w)² φ₀(z0)`.
    pub c: QVector,
    coords: Vec<BigInt>,
    // kernel Gram matrix applied to coords
    gram_coords: Vec<BigInt>,
}

/// One solution of the first equation joined with one solution of the third
/// equation per `z0`, consistent with the second equation and with the
/// polarised third equation across `z0` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurvivorTuple {
    pub eq1: Eq1Solution,
    pub per_z0: Vec<Eq3Solution>,
}

/// The equation data a candidate was rebuilt from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(with = "super::bigint_str")]
    pub s: BigInt,
    pub btilde: QVector,
    pub atilde: QVector,
    #[serde(with = "super::bigint_str::vec")]
    pub t: Vec<BigInt>,
    pub c: Vec<QVector>,
}

/// A rational `M` with `Mᵀ B M = B′`, verified exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateIsometry {
    pub matrix: QMatrix,
    /// `M ∈ GL_n(Z)`.
    pub integral: bool,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    #[default]
    All,
    FirstWitness,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub mode: SearchMode,
    /// Drop non-integral candidates from the output.
    pub integral_only: bool,
    /// Skip `t` values that Cauchy–Schwarz rules out for the second equation.
    pub cs_prune: bool,
}

/// Per-stage counts. Counts that depend on how far a first-witness search
/// got are left empty in that mode.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub eq1_raw: usize,
    pub eq1_canonical: usize,
    pub eq3_per_z0: Vec<usize>,
    /// Per first-equation solution, the product over `z0` of the number of
    /// third-equation solutions passing the second equation, summed.
    pub eq2_survivors: Option<usize>,
    /// Of those, the tuples also consistent across `z0` pairs.
    pub joint_survivors: Option<usize>,
    pub dual_rejected: Option<usize>,
    pub cs_pruned_groups: Option<usize>,
    pub rational_candidates: Option<usize>,
    pub integral_candidates: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub candidates: Vec<CandidateIsometry>,
    pub certificate: Certificate,
    pub stats: SearchStats,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn kernel_vector(p: &IsometryProblem, coords: &[BigInt]) -> QVector {
    let n = p.dim();
    let mut v = vec![BigInt::zero(); n];
    for (k, basis) in coords.iter().zip(&p.cache.kernel) {
        if k.is_zero() {
            continue;
        }
        for (vi, bi) in v.iter_mut().zip(basis) {
            *vi += k * bi;
        }
    }
    QVector::from_bigints(&v)
}

/// All `(x, y)` with `anchor · x² + (y in the kernel lattice, norm rest) = total`.
fn split_norm(p: &IsometryProblem, total: &BigInt) -> Result<Vec<(BigInt, Vec<BigInt>)>> {
    let kf = p.kernel_form()?;
    let n = p.anchor_norm();
    let mut out = Vec::new();
    if total.is_negative() {
        return Ok(out);
    }
    let xmax = (total / n).sqrt();
    let mut x = -&xmax;
    while x <= xmax {
        let rest = total - n * &x * &x;
        if !rest.is_negative() {
            for y in integer_vectors_of_norm(kf, &rest)? {
                out.push((x.clone(), y));
            }
        }
        x += 1;
    }
    Ok(out)
}

/// Enumerates the first integral equation.
pub fn solve_eq1(p: &IsometryProblem) -> Result<Eq1Report> {
    p.require_definite()?;
    let solutions: Vec<Eq1Solution> = split_norm(p, &p.eq1_target())?
        .into_iter()
        .map(|(s, coords)| Eq1Solution {
            btilde: kernel_vector(p, &coords),
            s,
            coords,
        })
        .collect();
    let canonical_count = solutions
        .iter()
        .filter(|e| {
            let first = if e.s.is_zero() {
                e.btilde.iter().find(|x| !x.is_zero()).map(|x| x.is_positive())
            } else {
                Some(e.s.is_positive())
            };
            first.unwrap_or(true)
        })
        .count();
    Ok(Eq1Report {
        solutions,
        canonical_count,
    })
}

/// Enumerates the third integral equation for one `z0 ∈ Z^n`.
pub fn solve_eq3_per_z0(p: &IsometryProblem, z0: &QVector) -> Result<Vec<Eq3Solution>> {
    p.require_definite()?;
    if !z0.is_integral() {
        return Err(crate::error::Error::NonIntegralVector);
    }
    let zp = perp_part(p.form(), p.anchor(), z0)?;
    let data = z0_constants(p.form(), p.target(), p.anchor(), z0, &zp);
    eq3_for(p, &data)
}

fn eq3_for(p: &IsometryProblem, data: &Z0Data) -> Result<Vec<Eq3Solution>> {
    let g = &p.cache.kernel_gram;
    Ok(split_norm(p, &data.eq3_target)?
        .into_iter()
        .map(|(t, coords)| {
            let gram_coords = g.iter().map(|row| dot(row, &coords)).collect();
            Eq3Solution {
                c: kernel_vector(p, &coords),
                t,
                coords,
                gram_coords,
            }
        })
        .collect())
}

#[derive(Default)]
struct FilterStats {
    pruned_groups: usize,
    eq2_product: usize,
}

/// Keeps the joint tuples consistent with the second equation for every
/// `z0` and with `B(cᵢ, cⱼ) + B(w,w) tᵢ tⱼ = B(w,w)⁴ B′(zᵢ, zⱼ)` for every
/// pair. `per_z0` must follow the order of `p.z0()`.
pub fn filter_eq2(
    p: &IsometryProblem,
    e1: &Eq1Solution,
    per_z0: &[Vec<Eq3Solution>],
    cs_prune: bool,
) -> Vec<SurvivorTuple> {
    filter_eq2_counted(p, e1, per_z0, cs_prune).0
}

fn filter_eq2_counted(
    p: &IsometryProblem,
    e1: &Eq1Solution,
    per_z0: &[Vec<Eq3Solution>],
    cs_prune: bool,
) -> (Vec<SurvivorTuple>, FilterStats) {
    assert_eq!(per_z0.len(), p.z0().len(), "one solution list per z0");
    let n = p.anchor_norm();
    let mut stats = FilterStats::default();
    // B(b̃, b̃), from the first equation
    let bnorm = p.eq1_target() - n * &e1.s * &e1.s;
    let filtered: Vec<Vec<&Eq3Solution>> = per_z0
        .iter()
        .zip(&p.cache.z0_data)
        .map(|(list, data)| {
            let mut keep = Vec::new();
            let mut start = 0;
            while start < list.len() {
                let t = &list[start].t;
                let end = start + list[start..].iter().take_while(|x| &x.t == t).count();
                // the second equation fixes B(b̃, c)
                let need = &data.eq2_target - n * &e1.s * t;
                let cnorm = &data.eq3_target - n * t * t;
                if cs_prune && &need * &need > &bnorm * &cnorm {
                    stats.pruned_groups += 1;
                } else {
                    keep.extend(
                        list[start..end]
                            .iter()
                            .filter(|x| dot(&e1.coords, &x.gram_coords) == need),
                    );
                }
                start = end;
            }
            keep
        })
        .collect();

    stats.eq2_product = filtered.iter().map(Vec::len).product();
    let mut out = Vec::new();
    let mut chosen: Vec<&Eq3Solution> = Vec::with_capacity(filtered.len());
    join(p, &filtered, &mut chosen, &mut |tuple| {
        out.push(SurvivorTuple {
            eq1: e1.clone(),
            per_z0: tuple.iter().map(|x| (*x).clone()).collect(),
        })
    });
    (out, stats)
}

fn join<'a>(
    p: &IsometryProblem,
    filtered: &'a [Vec<&'a Eq3Solution>],
    chosen: &mut Vec<&'a Eq3Solution>,
    emit: &mut dyn FnMut(&[&'a Eq3Solution]),
) {
    let i = chosen.len();
    if i == filtered.len() {
        emit(chosen);
        return;
    }
    let n = p.anchor_norm();
    for cand in &filtered[i] {
        let consistent = chosen.iter().enumerate().all(|(j, prev)| {
            dot(&prev.coords, &cand.gram_coords) + n * &prev.t * &cand.t == p.cache.cross[j][i]
        });
        if consistent {
            chosen.push(cand);
            join(p, filtered, chosen, emit);
            chosen.pop();
        }
    }
}

enum Rejection {
    DualGate,
    Verification,
}

/// Rebuilds `φ` from a survivor tuple. Returns `None` when `ã` is not in the
/// dual lattice or `Mᵀ B M ≠ B′`.
pub fn reconstruct(p: &IsometryProblem, tuple: &SurvivorTuple) -> Option<CandidateIsometry> {
    try_reconstruct(p, tuple).ok()
}

fn try_reconstruct(p: &IsometryProblem, tuple: &SurvivorTuple) -> std::result::Result<CandidateIsometry, Rejection> {
    let w = p.anchor();
    let nw = int_to_rat(p.anchor_norm());
    let mut pairings = vec![Rational::zero()];
    pairings.extend(tuple.per_z0.iter().map(|x| int_to_rat(&x.t)));
    let atilde = p
        .cache
        .pairing_inverse
        .mul_vec(&QVector::new(pairings))
        .expect("dimensions checked");
    if !dual_membership(p.form(), &atilde).expect("integral form") {
        return Err(Rejection::DualGate);
    }

    let e1 = &tuple.eq1;
    let inv_n = nw.recip();
    let inv_n2 = &inv_n * &inv_n;
    let phi_w = &w.scale(&(int_to_rat(&e1.s) * &inv_n)) + &e1.btilde.scale(&inv_n);
    let mut images = vec![phi_w.clone()];
    for ((sol, z0), data) in tuple.per_z0.iter().zip(p.z0()).zip(&p.cache.z0_data) {
        debug_assert_eq!(p.form().eval(z0, w).unwrap(), data.pairing_with_anchor);
        // φ(z) = φ₀(z0) + B(a, z0) w, and z0 = z + (B(z0,w)/B(w,w)) w
        let phi_z = (&sol.c + &w.scale(&int_to_rat(&sol.t))).scale(&inv_n2);
        let phi_z0 = &phi_z + &phi_w.scale(&(&data.pairing_with_anchor * &inv_n));
        images.push(phi_z0);
    }
    let m = &QMatrix::from_columns(&images).expect("square") * &p.cache.basis_inverse;
    let pulled = &(&m.transpose() * p.form().gram()) * &m;
    if &pulled != p.target().gram() {
        return Err(Rejection::Verification);
    }
    let integral = m.is_unimodular();
    Ok(CandidateIsometry {
        matrix: m,
        integral,
        provenance: Provenance {
            s: e1.s.clone(),
            btilde: e1.btilde.clone(),
            atilde,
            t: tuple.per_z0.iter().map(|x| x.t.clone()).collect(),
            c: tuple.per_z0.iter().map(|x| x.c.clone()).collect(),
        },
    })
}

#[derive(Default)]
struct Branch {
    eq2_survivors: usize,
    survivors: usize,
    dual_rejected: usize,
    pruned_groups: usize,
    candidates: Vec<CandidateIsometry>,
}

fn run_branch(p: &IsometryProblem, e1: &Eq1Solution, per_z0: &[Vec<Eq3Solution>], cs_prune: bool) -> Branch {
    let (tuples, fstats) = filter_eq2_counted(p, e1, per_z0, cs_prune);
    let mut branch = Branch {
        eq2_survivors: fstats.eq2_product,
        survivors: tuples.len(),
        pruned_groups: fstats.pruned_groups,
        ..Branch::default()
    };
    for tuple in &tuples {
        match try_reconstruct(p, tuple) {
            Ok(c) => branch.candidates.push(c),
            Err(Rejection::DualGate) => branch.dual_rejected += 1,
            Err(Rejection::Verification) => {
                // all three equations hold on a basis, so B_φ = B′ must follow
                debug_assert!(false, "survivor failed final verification");
            }
        }
    }
    branch
}

/// Runs the whole search: first equation, third equation per `z0`, joint
/// filtering with the second equation, reconstruction and verification.
pub fn find_isometries(p: &IsometryProblem, opts: &SearchOptions) -> Result<SearchOutcome> {
    p.require_definite()?;
    let mut stats = SearchStats::default();
    if !p.determinants_match() {
        return Ok(SearchOutcome {
            candidates: Vec::new(),
            certificate: Certificate::determinant_mismatch(p),
            stats,
        });
    }

    let eq1 = solve_eq1(p)?;
    stats.eq1_raw = eq1.solutions.len();
    stats.eq1_canonical = eq1.canonical_count;
    if eq1.solutions.is_empty() {
        return Ok(SearchOutcome {
            candidates: Vec::new(),
            certificate: Certificate::eq1_obstruction(p),
            stats,
        });
    }

    let per_z0: Vec<Vec<Eq3Solution>> = p
        .cache
        .z0_data
        .par_iter()
        .map(|data| eq3_for(p, data))
        .collect::<Result<_>>()?;
    stats.eq3_per_z0 = per_z0.iter().map(Vec::len).collect();

    if opts.mode == SearchMode::FirstWitness {
        let chunk = rayon::current_num_threads().max(1);
        for group in eq1.solutions.chunks(chunk) {
            let found = group
                .par_iter()
                .map(|e1| run_branch(p, e1, &per_z0, opts.cs_prune))
                .collect::<Vec<_>>()
                .into_iter()
                .flat_map(|b| b.candidates)
                .find(|c| c.integral);
            if let Some(witness) = found {
                return Ok(SearchOutcome {
                    certificate: Certificate::witness(witness.clone()),
                    candidates: vec![witness],
                    stats,
                });
            }
        }
    }

    let branches: Vec<Branch> = eq1
        .solutions
        .par_iter()
        .map(|e1| run_branch(p, e1, &per_z0, opts.cs_prune))
        .collect();
    let mut candidates = Vec::new();
    let (mut eq2, mut survivors, mut rejected, mut pruned) = (0, 0, 0, 0);
    for b in branches {
        eq2 += b.eq2_survivors;
        survivors += b.survivors;
        rejected += b.dual_rejected;
        pruned += b.pruned_groups;
        candidates.extend(b.candidates);
    }
    let integral = candidates.iter().filter(|c| c.integral).count();
    stats.eq2_survivors = Some(eq2);
    stats.joint_survivors = Some(survivors);
    stats.dual_rejected = Some(rejected);
    stats.cs_pruned_groups = Some(pruned);
    stats.rational_candidates = Some(candidates.len());
    stats.integral_candidates = Some(integral);

    let certificate = match candidates.iter().find(|c| c.integral) {
        Some(w) => Certificate::witness(w.clone()),
        None => Certificate {
            verdict: Verdict::NoIntegralIsometry,
            witness: None,
            detail: Detail::Candidates {
                rational_candidates: candidates.len(),
                equation: "no reconstructed M with MᵀBM = B′ lies in GL_n(Z)".into(),
            },
        },
    };
    if opts.integral_only {
        candidates.retain(|c| c.integral);
    }
    Ok(SearchOutcome {
        candidates,
        certificate,
        stats,
    })
}

/// Decomposition data of a known isometry, in the integral normalisation
/// used by the search: `(s, b̃, ã, [(B(ã,z0), φ̃₀(z0))])`.
pub fn integral_data(p: &IsometryProblem, m: &QMatrix) -> Result<(BigInt, QVector, QVector, Vec<(BigInt, QVector)>)> {
    use crate::forms::Endo;
    use crate::supergrade::GradedContext;
    let ctx = GradedContext::new(p.form().clone(), p.anchor().clone())?;
    let phi = Endo::new(m.clone());
    let d = ctx.full_decomposition(&phi)?;
    let nw = int_to_rat(p.anchor_norm());
    let n2 = &nw * &nw;
    let s = p.form().eval(p.anchor(), &phi.apply(p.anchor())?)?;
    let btilde = d.b.scale(&n2);
    let atilde = d.a.scale(&n2);
    let phi0 = d.phi0();
    let per_z0 = p
        .z0()
        .iter()
        .map(|z0| {
            let t = p.form().eval(&atilde, z0)?;
            let c = phi0.apply(z0)?.scale(&n2);
            Ok((t.to_integer(), c))
        })
        .collect::<Result<_>>()?;
    debug_assert!(s.is_integer());
    let _ = BigInt::one();
    Ok((s.to_integer(), btilde, atilde, per_z0))
}
