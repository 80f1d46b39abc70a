use std::collections::BTreeSet;

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::*;
use crate::forms::{pullback, Endo, GramForm};
use crate::linalg::{ratio, QMatrix, QVector};

fn wilson() -> IsometryProblem {
    let w = GramForm::from_int_rows(&[[5, 7, 6, 5], [7, 10, 8, 7], [6, 8, 10, 9], [5, 7, 9, 10]]).unwrap();
    IsometryProblem::new(GramForm::standard(4).unwrap(), w, QVector::from_ints(&[1, 0, 0, 0]), None).unwrap()
}

fn rank4() -> IsometryProblem {
    let b = GramForm::from_int_rows(&[[2, 1, 0, 0], [1, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 4]]).unwrap();
    let bp = GramForm::from_int_rows(&[[2, 1, 1, 0], [1, 2, 0, 0], [1, 0, 2, 0], [0, 0, 0, 6]]).unwrap();
    let z0 = vec![
        QVector::from_ints(&[0, 1, 0, 0]),
        QVector::from_ints(&[0, 0, 1, 0]),
        QVector::from_ints(&[0, 0, 0, 1]),
    ];
    IsometryProblem::new(b, bp, QVector::from_ints(&[1, 0, 0, 0]), Some(z0)).unwrap()
}

fn rank2() -> IsometryProblem {
    IsometryProblem::new(
        GramForm::diagonal(&[1, 5]).unwrap(),
        GramForm::from_int_rows(&[[2, 1], [1, 3]]).unwrap(),
        QVector::from_ints(&[1, 0]),
        None,
    )
    .unwrap()
}

fn all() -> SearchOptions {
    SearchOptions::default()
}

#[test]
fn rank2_first_equation_is_empty() {
    let p = rank2();
    assert!(p.determinants_match());
    assert_eq!(p.eq1_target(), BigInt::from(2));
    assert!(solve_eq1(&p).unwrap().solutions.is_empty());
    let out = find_isometries(&p, &all()).unwrap();
    assert_eq!(out.certificate.verdict, Verdict::ObstructionEq1);
    assert!(verify_certificate(&out.certificate, &p));
    assert_eq!(verify_standalone(&out.certificate), Some(true));
}

#[test]
fn rank4_first_equation_counts() {
    let r = solve_eq1(&rank4()).unwrap();
    assert_eq!(r.canonical_count, 10);
    assert_eq!(r.solutions.len(), 20);
    for e in &r.solutions {
        assert_eq!(e.btilde[1], -e.btilde[0].clone() * ratio(2, 1));
    }
}

#[test]
fn wilson_first_equation_counts() {
    let r = solve_eq1(&wilson()).unwrap();
    assert_eq!(r.solutions.len(), 48);
    assert_eq!(r.canonical_count, 24);
}

#[test]
fn wilson_search() {
    let p = wilson();
    let out = find_isometries(&p, &all()).unwrap();
    eprintln!("{:?}", out.stats);
    let integral: Vec<_> = out.candidates.iter().filter(|c| c.integral).collect();
    // every integral M satisfies MᵀM = W; they are exactly U·M′ with U ∈ O(4, Z)
    assert_eq!(integral.len(), 384);
    assert_eq!(out.certificate.verdict, Verdict::IsometricWitness);
    assert!(verify_certificate(&out.certificate, &p));
    let mp = QMatrix::from_int_rows(&[[2, 3, 2, 2], [1, 1, 2, 1], [0, 0, 1, 2], [0, 0, 1, 1]]);
    let mp_inv = mp.inverse().unwrap();
    for c in &integral {
        let u = &c.matrix * &mp_inv;
        assert!(u.is_integral());
        assert_eq!(&u.transpose() * &u, QMatrix::identity(4));
    }
}

#[test]
fn rank4_search_matches_listed_matrices() {
    let p = rank4();
    let out = find_isometries(&p, &all()).unwrap();
    eprintln!("{:?}", out.stats);
    assert_eq!(out.certificate.verdict, Verdict::NoIntegralIsometry);
    assert!(out.candidates.iter().all(|c| !c.integral));
    let found: BTreeSet<QMatrix> = out.candidates.iter().map(|c| c.matrix.sign_canonical()).collect();
    for m in listed_rank4_matrices() {
        assert!(found.contains(&m.sign_canonical()), "missing {m}");
    }
    assert!(brute_force_isometries(p.form(), p.target(), ColumnSource::Box(4)).unwrap().is_empty());
    assert!(brute_force_isometries(p.form(), p.target(), ColumnSource::Enumerated).unwrap().is_empty());
}

pub(crate) fn listed_rank4_matrices() -> Vec<QMatrix> {
    let q = |rows: [[(i64, i64); 4]; 4]| {
        QMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(n, d)| ratio(n, d)).collect())
                .collect(),
        )
        .unwrap()
    };
    let h = |n: i64| (n, 2);
    let f = |n: i64| (n, 4);
    let i = |n: i64| (n, 1);
    let top = [h(1), f(3), f(3), h(1)];
    let second = [i(-1), h(-1), h(-1), i(-1)];
    let third_a = [h(-1), f(-1), f(-1), h(3)];
    let third_b = [h(1), f(1), f(1), h(-3)];
    let last_a = [i(0), h(-1), h(1), i(0)];
    let last_b = [i(0), h(1), h(-1), i(0)];
    vec![
        q([top, second, third_a, last_a]),
        q([top, second, third_a, last_b]),
        q([top, second, third_b, last_a]),
        q([top, second, third_b, last_b]),
        q([[h(1), i(1), i(0), i(1)], [i(0), i(0), i(0), i(-2)], [h(1), i(0), i(1), i(0)], [h(-1), i(0), i(0), i(0)]]),
        q([[h(1), i(1), i(0), i(1)], [i(0), i(0), i(0), i(-2)], [h(1), i(0), i(1), i(0)], [h(1), i(0), i(0), i(0)]]),
        q([[i(0), h(1), h(1), i(1)], [i(0), i(0), i(0), i(-2)], [i(1), h(1), h(1), i(0)], [i(0), h(-1), h(1), i(0)]]),
        q([[i(0), h(1), h(1), i(1)], [i(0), i(0), i(0), i(-2)], [i(1), h(1), h(1), i(0)], [i(0), h(1), h(-1), i(0)]]),
    ]
}

#[test]
fn listed_rank4_matrices_are_rational_isometries() {
    let p = rank4();
    for m in listed_rank4_matrices() {
        assert_eq!(&(&m.transpose() * p.form().gram()) * &m, *p.target().gram(), "{m}");
        assert!(!m.is_integral());
    }
}

fn random_unimodular(rng: &mut StdRng, n: usize, steps: usize) -> QMatrix {
    let mut m = QMatrix::identity(n);
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        while j == i {
            j = rng.gen_range(0..n);
        }
        let k = rng.gen_range(-1i64..=1);
        let e = QMatrix::from_fn(n, |r, c| {
            if r == c {
                crate::linalg::rat(1)
            } else if r == i && c == j {
                crate::linalg::rat(k)
            } else {
                crate::linalg::rat(0)
            }
        });
        m = &m * &e;
        if rng.gen_bool(0.2) {
            let flip = QMatrix::from_fn(n, |r, c| match (r == c, r == i) {
                (true, true) => crate::linalg::rat(-1),
                (true, false) => crate::linalg::rat(1),
                _ => crate::linalg::rat(0),
            });
            m = &m * &flip;
        }
    }
    m
}

fn random_definite(rng: &mut StdRng, n: usize) -> GramForm {
    loop {
        let g = QMatrix::from_fn(n, |_, _| crate::linalg::rat(0));
        let mut rows = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = if i == j { rng.gen_range(1..=4) } else { rng.gen_range(-1..=1) };
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        let _ = g;
        if let Ok(f) = GramForm::from_int_rows(&rows) {
            if f.is_positive_definite() {
                return f;
            }
        }
    }
}

#[test]
fn candidates_are_distinct() {
    for p in [wilson(), rank4()] {
        let out = find_isometries(&p, &all()).unwrap();
        let set: BTreeSet<&QMatrix> = out.candidates.iter().map(|c| &c.matrix).collect();
        assert_eq!(set.len(), out.candidates.len());
    }
}

#[test]
fn identity_problem_recovers_identity() {
    let b = GramForm::from_int_rows(&[[2, 1, 0], [1, 3, 1], [0, 1, 2]]).unwrap();
    let p = IsometryProblem::new(b.clone(), b, QVector::from_ints(&[1, 0, 0]), None).unwrap();
    let out = find_isometries(&p, &all()).unwrap();
    assert!(out.candidates.iter().any(|c| c.matrix == QMatrix::identity(3) && c.integral));
    assert_eq!(out.certificate.verdict, Verdict::IsometricWitness);
}

#[test]
fn second_equation_removes_inconsistent_tuples() {
    let p = rank4();
    // B′(w, z) = 1 for z0 = e3, so b̃ = 0 with t = 0 cannot satisfy the second equation
    let e1 = solve_eq1(&p).unwrap();
    let zero_b = e1.solutions.iter().find(|e| e.btilde.is_zero()).unwrap();
    let per: Vec<_> = p.z0().iter().map(|z| solve_eq3_per_z0(&p, z).unwrap()).collect();
    assert!(per[1].iter().any(|x| x.t == BigInt::from(0)));
    let kept = filter_eq2(&p, zero_b, &per, false);
    assert!(kept.iter().all(|t| t.per_z0[1].t != BigInt::from(0)));
}

#[test]
fn z0_multiple_of_anchor_is_rejected() {
    let p = rank4();
    let err = solve_eq3_per_z0(&p, &QVector::from_ints(&[2, 0, 0, 0])).unwrap_err();
    assert!(matches!(err, crate::error::Error::DegenerateZ0(_)));
    let b = p.form().clone();
    let err = IsometryProblem::new(
        b.clone(),
        b,
        QVector::from_ints(&[1, 0, 0, 0]),
        Some(vec![
            QVector::from_ints(&[1, 0, 0, 0]),
            QVector::from_ints(&[0, 1, 0, 0]),
            QVector::from_ints(&[0, 0, 1, 0]),
        ]),
    )
    .unwrap_err();
    assert!(matches!(err, crate::error::Error::DegenerateZ0(_)));
}

#[test]
fn indefinite_search_is_unsupported() {
    let b = GramForm::diagonal(&[1, -1]).unwrap();
    let p = IsometryProblem::new(b.clone(), b, QVector::from_ints(&[1, 0]), None).unwrap();
    assert_eq!(find_isometries(&p, &all()).unwrap_err(), crate::error::Error::NotPositiveDefinite);
    assert_eq!(solve_eq1(&p).unwrap_err(), crate::error::Error::NotPositiveDefinite);
}

#[test]
fn determinant_mismatch_short_circuits() {
    let p = IsometryProblem::new(
        GramForm::diagonal(&[1, 5]).unwrap(),
        GramForm::diagonal(&[1, 6]).unwrap(),
        QVector::from_ints(&[1, 0]),
        None,
    )
    .unwrap();
    let out = find_isometries(&p, &all()).unwrap();
    assert_eq!(out.certificate.verdict, Verdict::DeterminantMismatch);
    assert!(verify_certificate(&out.certificate, &p));
    assert!(!verify_certificate(&out.certificate, &rank2()));
}

#[test]
fn decomposition_data_solves_the_equations() {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..30 {
        let n = rng.gen_range(2..=4);
        let b = random_definite(&mut rng, n);
        let m = random_unimodular(&mut rng, n, 6);
        let bp = pullback(&b, &Endo::new(m.clone())).unwrap();
        let bp = GramForm::new(bp.gram().clone()).unwrap();
        let w = suggest_anchor(&b);
        let p = IsometryProblem::new(b, bp, w, None).unwrap();
        let (s, btilde, _atilde, per_z0) = integral_data(&p, &m).unwrap();
        let e1 = solve_eq1(&p).unwrap();
        assert!(e1.solutions.iter().any(|e| e.s == s && e.btilde == btilde));
        for (z0, (t, c)) in p.z0().iter().zip(&per_z0) {
            let sols = solve_eq3_per_z0(&p, z0).unwrap();
            assert!(sols.iter().any(|x| &x.t == t && &x.c == c), "z0 {z0}");
        }
        let out = find_isometries(&p, &all()).unwrap();
        assert!(out.candidates.iter().any(|c| c.matrix == m && c.integral));
    }
}

#[test]
fn pruning_never_changes_results() {
    let mut problems = vec![wilson(), rank4(), rank2()];
    let mut rng = StdRng::seed_from_u64(8);
    for _ in 0..10 {
        let n = rng.gen_range(2..=3);
        let b = random_definite(&mut rng, n);
        let m = random_unimodular(&mut rng, n, 4);
        let bp = GramForm::new(pullback(&b, &Endo::new(m)).unwrap().gram().clone()).unwrap();
        let w = suggest_anchor(&b);
        problems.push(IsometryProblem::new(b, bp, w, None).unwrap());
    }
    for p in &problems {
        let plain = find_isometries(p, &all()).unwrap();
        let pruned = find_isometries(p, &SearchOptions { cs_prune: true, ..all() }).unwrap();
        assert_eq!(plain.candidates, pruned.candidates);
        assert_eq!(plain.stats.joint_survivors, pruned.stats.joint_survivors);
    }
}

#[test]
fn tampered_witness_fails_verification() {
    let p = wilson();
    let out = find_isometries(&p, &SearchOptions { mode: SearchMode::FirstWitness, ..all() }).unwrap();
    assert!(verify_certificate(&out.certificate, &p));
    let mut bad = out.certificate.clone();
    let w = bad.witness.as_mut().unwrap();
    let mut rows: Vec<Vec<_>> = w.matrix.rows().into_iter().map(|r| r.into_entries()).collect();
    rows[2][1] += crate::linalg::rat(1);
    w.matrix = QMatrix::from_rows(rows).unwrap();
    assert!(!verify_certificate(&bad, &p));
}

#[test]
fn no_integral_certificate_rechecks() {
    let p = rank4();
    let out = find_isometries(&p, &all()).unwrap();
    assert!(verify_certificate(&out.certificate, &p));
    let mut bad = out.certificate.clone();
    bad.detail = Detail::Candidates {
        rational_candidates: 3,
        equation: String::new(),
    };
    assert!(!verify_certificate(&bad, &p));
    assert!(!verify_certificate(&out.certificate, &wilson()));
}

#[test]
fn first_witness_mode_is_deterministic() {
    let p = wilson();
    let opts = SearchOptions { mode: SearchMode::FirstWitness, ..all() };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| find_isometries(&p, &opts).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
    assert_eq!(one.candidates.len(), 1);
    assert!(one.candidates[0].integral);
    assert_eq!(one.stats.joint_survivors, None);
    let full = find_isometries(&p, &all()).unwrap();
    assert_eq!(Some(&one.candidates[0]), full.candidates.iter().find(|c| c.integral));
    let run_all = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| find_isometries(&p, &all()).unwrap())
    };
    assert_eq!(run_all(1), run_all(5));
}

#[test]
fn integral_only_filters_output() {
    let p = rank4();
    let out = find_isometries(&p, &SearchOptions { integral_only: true, ..all() }).unwrap();
    assert!(out.candidates.is_empty());
    assert_eq!(out.stats.rational_candidates, Some(224));
}

#[test]
fn family_certificates() {
    let big = |v: i64| BigInt::from(v);
    let c = family_obstruction(&FamilyParams::Rank3 { m: big(3) }).unwrap();
    assert_eq!(c.verdict, Verdict::ObstructionThreeSquares);
    match &c.detail {
        Detail::Squares { value, reduced, .. } => {
            // 4m³ + m + 1 = 112 = 4·28 = 4²·7
            assert_eq!(*reduced, big(112));
            assert_eq!(*value, big(16 * 81 * 112));
        }
        other => panic!("{other:?}"),
    }
    let p = FamilyParams::Rank3 { m: big(3) }.problem().unwrap();
    assert_eq!(p.anchor_norm(), &big(36));
    assert!(verify_certificate(&c, &p));

    let variant = FamilyParams::Rank3Variant {
        m: big(3),
        alpha: big(60),
        beta: big(6),
        gamma: big(6),
    };
    let c = family_obstruction(&variant).unwrap();
    assert_eq!(c.verdict, Verdict::ObstructionThreeSquares);
    assert!(matches!(&c.detail, Detail::Squares { reduced, .. } if *reduced == big(79)));
    assert!(verify_certificate(&c, &variant.problem().unwrap()));

    assert_eq!(
        family_obstruction(&FamilyParams::Rank3 { m: big(1) }).unwrap().verdict,
        Verdict::Inconclusive
    );
    let bad = FamilyParams::Rank3Variant {
        m: big(3),
        alpha: big(60),
        beta: big(6),
        gamma: big(7),
    };
    assert!(matches!(family_obstruction(&bad), Err(crate::error::Error::BadFamilyParams(_))));

    let rank2 = FamilyParams::Rank2 {
        m: big(3),
        n: big(1),
        alpha: big(3),
        beta: big(3),
        gamma: big(6),
    };
    let c = family_obstruction(&rank2).unwrap();
    assert_eq!(c.verdict, Verdict::ObstructionTwoSquares);
    let p = rank2.problem().unwrap();
    assert!(solve_eq1(&p).unwrap().solutions.is_empty());
    assert!(verify_certificate(&c, &p));
    // a squares certificate does not transfer to an unrelated problem
    assert!(!verify_certificate(&c, &rank4()));
}

#[test]
fn bare_squares_certificates() {
    let big = BigInt::from;
    assert_eq!(squares_obstruction(&big(25), Squares::Two).verdict, Verdict::Inconclusive);
    assert_eq!(squares_obstruction(&big(7), Squares::Three).verdict, Verdict::ObstructionThreeSquares);
    assert_eq!(squares_obstruction(&big(21), Squares::Two).verdict, Verdict::ObstructionTwoSquares);
    for c in [
        squares_obstruction(&big(25), Squares::Two),
        squares_obstruction(&big(7), Squares::Three),
    ] {
        assert_eq!(verify_standalone(&c), Some(true));
    }
}

#[test]
fn rank3_scan_marks_obstructed_values() {
    let scan = rank3_scan(1..=12);
    assert_eq!(scan.len(), 12);
    assert!(scan.contains(&(3, true)));
    assert!(scan.contains(&(1, false)));
}

#[test]
fn oracle_small_cases() {
    let i2 = GramForm::standard(2).unwrap();
    let all2 = brute_force_isometries(&i2, &i2, ColumnSource::Enumerated).unwrap();
    assert_eq!(all2.len(), 8);
    for m in &all2 {
        assert_eq!(&m.transpose() * m, QMatrix::identity(2));
    }
    let p = rank2();
    assert!(brute_force_isometries(p.form(), p.target(), ColumnSource::Enumerated).unwrap().is_empty());
}

#[test]
fn oracle_agrees_on_wilson() {
    let p = wilson();
    let oracle: BTreeSet<QMatrix> = brute_force_isometries(p.form(), p.target(), ColumnSource::Enumerated)
        .unwrap()
        .into_iter()
        .collect();
    let ours: BTreeSet<QMatrix> = find_isometries(&p, &all())
        .unwrap()
        .candidates
        .into_iter()
        .filter(|c| c.integral)
        .map(|c| c.matrix)
        .collect();
    assert_eq!(oracle.len(), 384);
    assert_eq!(oracle, ours);
}

#[test]
fn certificate_json_round_trip() {
    for p in [wilson(), rank4(), rank2()] {
        let cert = find_isometries(&p, &all()).unwrap().certificate;
        let text = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cert);
        assert!(verify_certificate(&back, &p));
    }
}
