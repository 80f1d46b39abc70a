use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name)
}

fn superlat(args: &[&str]) -> Output {
    superlat_env(args, None)
}

fn superlat_env(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_superlat"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("SUPERLAT_THREADS", t),
        None => cmd.env_remove("SUPERLAT_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_doc(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn wilson_all_finds_integral_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("wilson.json");
    let wilson = problem("wilson.txt");
    let out = superlat(&["factorize", path_str(&wilson), "--all", "--json", path_str(&out_path)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let doc = json_doc(&out_path);
    assert_eq!(doc["certificate"]["verdict"], "IsometricWitness");
    assert_eq!(doc["stats"]["eq1_canonical"], 24);
    let cands = doc["candidates"].as_array().unwrap();
    assert_eq!(cands.len(), 384);
    assert!(cands.iter().all(|c| c["integral"] == true));
    assert!(doc["timing"]["elapsed_ms"].is_number());
}

#[test]
fn rational_only_example_is_negative() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r4.json");
    let file = problem("rank4_rational_only.txt");
    let out = superlat(&["factorize", path_str(&file), "--json", path_str(&out_path)]);
    assert_eq!(code(&out), 1);
    let doc = json_doc(&out_path);
    assert_eq!(doc["certificate"]["verdict"], "NoIntegralIsometry");
    let cands = doc["candidates"].as_array().unwrap();
    assert!(cands.len() >= 8);
    assert!(cands.iter().all(|c| c["integral"] == false));
    // matrices are arrays of "p/q" strings
    assert!(cands[0]["matrix"][0][0].is_string());
}

#[test]
fn first_equation_obstruction() {
    let out = superlat(&["factorize", path_str(&problem("rank2_obstructed.txt"))]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("ObstructionEq1"));
}

#[test]
fn obstruct_exit_codes() {
    let out = superlat(&["obstruct", "--family", "rank3", "--m", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("ObstructionThreeSquares") && text.contains("112"), "{text}");

    let out = superlat(&["obstruct", "--family", "rank3-variant", "--m", "3", "--alpha", "60", "--beta", "6", "--gamma", "6"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("79"));

    assert_eq!(code(&superlat(&["obstruct", "--N", "25", "--squares", "2"])), 1);
    assert_eq!(code(&superlat(&["obstruct", "--N", "7", "--squares", "3"])), 0);
    assert_eq!(code(&superlat(&["obstruct", "--N", "21", "--squares", "2"])), 0);

    let bad = superlat(&["obstruct", "--family", "rank2", "--m", "3", "--n", "1", "--alpha", "3", "--beta", "3", "--gamma", "7"]);
    assert_eq!(code(&bad), 2);
    assert_eq!(code(&superlat(&["obstruct", "--family", "rank3"])), 2);
    assert_eq!(code(&superlat(&["obstruct"])), 2);
}

#[test]
fn rank3_scan_is_a_demo() {
    let out = superlat(&["obstruct", "--family", "rank3", "--scan", "1..12"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("m = 3: obstructed"));
}

#[test]
fn oracle_agrees_with_factorize() {
    let out = superlat(&["oracle", path_str(&problem("wilson.txt"))]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("384 integral isometries"));
    let out = superlat(&["oracle", path_str(&problem("rank4_rational_only.txt")), "--bound", "4"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_accepts_fresh_and_rejects_corrupted() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(Vec<String>, &str)> = vec![
        (vec!["factorize".into(), path_str(&problem("wilson.txt")).into()], "wilson"),
        (vec!["factorize".into(), path_str(&problem("rank4_rational_only.txt")).into()], "r4"),
        (vec!["factorize".into(), path_str(&problem("rank2_obstructed.txt")).into()], "r2"),
        (vec!["obstruct".into(), "--family".into(), "rank3".into(), "--m".into(), "3".into()], "ob"),
        (vec!["decompose".into(), path_str(&problem("decompose_diag123.txt")).into()], "dec"),
        (vec!["oracle".into(), path_str(&problem("wilson.txt")).into()], "orc"),
    ];
    for (mut args, name) in cases {
        let path = dir.path().join(format!("{name}.json"));
        args.extend(["--json".into(), path_str(&path).into()]);
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        superlat(&argv);
        let fresh = superlat(&["verify", path_str(&path)]);
        assert_eq!(code(&fresh), 0, "{name}: {}", stdout(&fresh));
    }

    let corrupt = |name: &str, edit: &dyn Fn(&mut Value)| {
        let mut doc = json_doc(&dir.path().join(format!("{name}.json")));
        edit(&mut doc);
        let bad = dir.path().join(format!("{name}_bad.json"));
        std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
        code(&superlat(&["verify", path_str(&bad)]))
    };
    assert_eq!(corrupt("wilson", &|d| d["certificate"]["witness"]["matrix"][0][0] = "3".into()), 1);
    assert_eq!(corrupt("wilson", &|d| d["candidates"][5]["matrix"][1][1] = "1/2".into()), 1);
    assert_eq!(corrupt("r4", &|d| d["input"]["Bprime"][3][3] = "2".into()), 1);
    assert_eq!(corrupt("r2", &|d| d["certificate"]["detail"]["target"] = "3".into()), 1);
    assert_eq!(corrupt("ob", &|d| d["certificate"]["detail"]["value"] = "145153".into()), 1);
    assert_eq!(corrupt("dec", &|d| d["decomposition"]["weight"] = "2".into()), 1);
    assert_eq!(corrupt("orc", &|d| {
        d["oracle_matrices"].as_array_mut().unwrap().pop();
    }), 1);

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(code(&superlat(&["verify", path_str(&garbage)])), 2);
}

#[test]
fn json_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (file, extra) in [
        ("wilson.txt", vec!["--all"]),
        ("wilson.txt", vec!["--first"]),
        ("rank4_rational_only.txt", vec!["--cs-prune"]),
    ] {
        let docs: Vec<Value> = ["1", "3", "8"]
            .iter()
            .map(|t| {
                let path = dir.path().join(format!("out_{t}.json"));
                let input = problem(file);
                let mut args = vec!["factorize", path_str(&input)];
                args.extend(&extra);
                args.extend(["--json", path_str(&path)]);
                superlat_env(&args, Some(t));
                without_timing(json_doc(&path))
            })
            .collect();
        assert!(docs.windows(2).all(|w| w[0] == w[1]), "{file} {extra:?}");
    }
}

#[test]
fn json_to_stdout_is_byte_identical_apart_from_timing() {
    let run = || {
        let out = superlat(&["factorize", path_str(&problem("rank4_rational_only.txt")), "--json", "-"]);
        let text = stdout(&out);
        text.lines()
            .filter(|l| !l.contains("elapsed_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(run(), run());
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let cases = [
        write("asym.txt", "B\n1 2\n3 4\nBprime\n1 0\n0 1\nw 1 0\n"),
        write("rows.txt", "n 3\nB\n1 0 0\n0 1 0\nBprime\n1 0 0\n0 1 0\n0 0 1\nw 1 0 0\n"),
        write("zero_w.txt", "B\n1 0\n0 1\nBprime\n1 0\n0 1\nw 0 0\n"),
        write("no_bprime.txt", "B\n1 0\n0 1\nw 1 0\n"),
        write("no_w.txt", "B\n1 0\n0 1\nBprime\n1 0\n0 1\n"),
    ];
    for p in &cases {
        let out = superlat(&["factorize", path_str(p)]);
        assert_eq!(code(&out), 2, "{}", p.display());
    }
    assert_eq!(code(&superlat(&["factorize", "/nonexistent/problem.txt"])), 2);
    assert_eq!(code(&superlat(&["factorize", path_str(&problem("wilson.txt")), "--w", "1,0"])), 2);
    assert_eq!(code(&superlat_env(&["factorize", path_str(&problem("wilson.txt"))], Some("zero"))), 2);
}

#[test]
fn suggested_anchor_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("no_w.txt");
    std::fs::write(&p, "B\n2 1\n1 3\nBprime\n2 1\n1 3\n").unwrap();
    assert_eq!(code(&superlat(&["factorize", path_str(&p)])), 2);
    assert_eq!(code(&superlat(&["factorize", path_str(&p), "--suggest-w"])), 0);
}

#[test]
fn invariant_violations_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("isotropic.txt");
    // w = (1,1) is isotropic for diag(1,-1)
    std::fs::write(&p, "B\n1 0\n0 -1\nw 1 1\nphi\n1 0\n0 1\n").unwrap();
    assert_eq!(code(&superlat(&["decompose", path_str(&p)])), 3);
    let q = dir.path().join("degenerate.txt");
    std::fs::write(&q, "B\n1 1\n1 1\nw 1 0\nphi\n1 0\n0 1\n").unwrap();
    assert_eq!(code(&superlat(&["decompose", path_str(&q)])), 3);
}

#[test]
fn indefinite_search_is_unsupported() {
    let out = superlat(&["factorize", path_str(&problem("indefinite.txt"))]);
    assert_eq!(code(&out), 4);
    assert_eq!(code(&superlat(&["oracle", path_str(&problem("indefinite.txt"))])), 4);
}

#[test]
fn decompose_reports_zero_residual() {
    let out = superlat(&["decompose", path_str(&problem("decompose_diag123.txt"))]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("reassembly residual is zero: true"));
    assert!(text.contains("wt = 1"));

    let dir = tempfile::tempdir().unwrap();
    let id = dir.path().join("id.txt");
    std::fs::write(&id, "1 0 0\n0 1 0\n0 0 1\n").unwrap();
    let out = superlat(&["decompose", path_str(&problem("decompose_diag123.txt")), "--phi", path_str(&id), "--w", "1,1,1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("wt = 1") && text.contains("a = (0, 0, 0)") && text.contains("b = (0, 0, 0)"), "{text}");
}

#[test]
fn grade_basis_dimensions() {
    let out = superlat(&["grade-basis", path_str(&problem("decompose_diag123.txt"))]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("even component: dimension 5 (expected 5)"));
    assert!(text.contains("odd component: dimension 4 (expected 4)"));
}
