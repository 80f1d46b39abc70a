use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::Zero;
use superlat_core::isosearch::{
    brute_force_isometries, family_obstruction, rank3_scan, squares_obstruction, suggest_anchor, verify_standalone,
    ColumnSource, Detail, FamilyParams, SearchMode, Squares,
};
use superlat_core::{
    find_isometries, isosearch::verify_certificate, Certificate, Endo, Error, GradedContext, GramForm,
    IsometryProblem, QMatrix, QVector, SearchOptions, Verdict,
};

use crate::document::{Command, Input, ResultDocument};
use crate::problem_file::{parse_anchor, parse_list, parse_matrix, parse_problem, ParseError, ProblemFile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Invariant(String),
    Unsupported(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Unsupported(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
            CliError::Unsupported(m) => write!(f, "unsupported: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPositiveDefinite => CliError::Unsupported(format!("{e} (search needs a definite B)")),
            Error::BadFamilyParams(_) | Error::NotSymmetric | Error::NotSquare { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

/// Human-readable output goes to stderr when the JSON document takes stdout.
struct Printer {
    to_stderr: bool,
}

impl Printer {
    fn for_json(json: Option<&Path>) -> Self {
        Printer {
            to_stderr: json.is_some_and(|p| p.as_os_str() == "-"),
        }
    }

    fn line(&self, s: impl fmt::Display) {
        // A closed pipe (e.g. `| head`) is not an error worth reporting.
        let _ = if self.to_stderr {
            writeln!(std::io::stderr().lock(), "{s}")
        } else {
            writeln!(std::io::stdout().lock(), "{s}")
        };
    }

    fn matrix(&self, title: &str, m: &QMatrix) {
        self.line(title);
        self.line(m.to_string().trim_end());
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn read_problem(path: &Path) -> Result<ProblemFile, CliError> {
    let text = read_text(path)?;
    parse_problem(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn resolve_anchor(pf: &ProblemFile, flag: Option<&str>, suggest: bool) -> Result<QVector, CliError> {
    if let Some(raw) = flag {
        return Ok(parse_anchor(pf.n, &parse_list(raw)?, None)?);
    }
    if let Some(w) = &pf.w {
        return Ok(w.clone());
    }
    if suggest {
        let w = suggest_anchor(&GramForm::new(pf.b.clone())?);
        eprintln!("using suggested w = {w}");
        return Ok(w);
    }
    Err(CliError::Parse(
        "no anchor: pass --w, add a `w` block or use --suggest-w".into(),
    ))
}

fn require_bprime(pf: &ProblemFile) -> Result<QMatrix, CliError> {
    pf.bprime
        .clone()
        .ok_or_else(|| CliError::Parse("missing block Bprime".into()))
}

fn emit(doc: &mut ResultDocument, json: Option<&Path>, started: Instant) -> Result<(), CliError> {
    let Some(path) = json else { return Ok(()) };
    doc.timing.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    let text = doc.to_json();
    if path.as_os_str() == "-" {
        print!("{text}");
        Ok(())
    } else {
        std::fs::write(path, text).map_err(|e| CliError::Invariant(format!("{}: {e}", path.display())))
    }
}

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

pub fn decompose(
    file: &Path,
    w: Option<&str>,
    suggest: bool,
    phi_path: Option<&Path>,
    json: Option<&Path>,
) -> Result<u8, CliError> {
    let started = Instant::now();
    let out = Printer::for_json(json);
    let pf = read_problem(file)?;
    let w = resolve_anchor(&pf, w, suggest)?;
    let phi = match phi_path {
        Some(p) => parse_matrix(&read_text(p)?)?,
        None => pf
            .phi
            .clone()
            .ok_or_else(|| CliError::Parse("no φ: pass --phi or add a `phi` block".into()))?,
    };
    if phi.dim() != pf.n {
        return Err(CliError::Parse(format!("φ is {0}×{0}, expected n = {1}", phi.dim(), pf.n)));
    }
    let ctx = GradedContext::new(GramForm::new(pf.b.clone())?, w.clone())?;
    let endo = Endo::new(phi.clone());
    let d = ctx.full_decomposition(&endo)?;
    let (even, odd) = ctx.split(&endo)?;
    let residual = &ctx.reassemble(&d).into_mat() - &phi;

    out.line(format!("B(w,w) = {}", ctx.anchor_norm()));
    out.matrix("even part:", even.mat());
    out.matrix("odd part:", odd.mat());
    out.matrix("φ₀:", &d.phi0);
    out.line(format!("wt = {}", d.weight));
    out.line(format!("a = {}", d.a));
    out.line(format!("b = {}", d.b));
    out.line(format!("reassembly residual is zero: {}", residual.is_zero()));
    if !residual.is_zero() {
        return Err(CliError::Invariant("reassembly residual is nonzero".into()));
    }

    let mut doc = ResultDocument::new(
        Command::Decompose,
        Input {
            n: Some(pf.n),
            b: Some(pf.b),
            w: Some(w),
            phi: Some(phi),
            ..Input::default()
        },
    );
    doc.decomposition = Some(d);
    emit(&mut doc, json, started)?;
    Ok(EXIT_OK)
}

pub fn grade_basis(file: &Path, w: Option<&str>, suggest: bool) -> Result<u8, CliError> {
    let pf = read_problem(file)?;
    let w = resolve_anchor(&pf, w, suggest)?;
    let ctx = GradedContext::new(GramForm::new(pf.b.clone())?, w)?;
    let out = Printer { to_stderr: false };
    let n = pf.n;
    for (name, basis, expected) in [
        ("even", ctx.even_basis(), n * n - 2 * n + 2),
        ("odd", ctx.odd_basis(), 2 * n - 2),
    ] {
        out.line(format!("{name} component: dimension {} (expected {expected})", basis.len()));
        for (i, e) in basis.iter().enumerate() {
            out.matrix(&format!("{name}[{i}]:"), e.mat());
        }
    }
    Ok(EXIT_OK)
}

pub struct FactorizeFlags {
    pub first: bool,
    pub integral_only: bool,
    pub cs_prune: bool,
}

pub fn factorize(
    file: &Path,
    w: Option<&str>,
    suggest: bool,
    flags: FactorizeFlags,
    json: Option<&Path>,
) -> Result<u8, CliError> {
    let started = Instant::now();
    let out = Printer::for_json(json);
    let pf = read_problem(file)?;
    let w = resolve_anchor(&pf, w, suggest)?;
    let bprime = require_bprime(&pf)?;
    let problem = IsometryProblem::new(
        GramForm::new(pf.b.clone())?,
        GramForm::new(bprime.clone())?,
        w.clone(),
        pf.z0.clone(),
    )?;
    let opts = SearchOptions {
        mode: if flags.first {
            SearchMode::FirstWitness
        } else {
            SearchMode::All
        },
        integral_only: flags.integral_only,
        cs_prune: flags.cs_prune,
    };
    let result = find_isometries(&problem, &opts)?;
    let st = &result.stats;

    out.line(format!("n = {}, w = {}, B(w,w) = {}", pf.n, w, problem.anchor_norm()));
    out.line(format!(
        "equation 1: {} solutions ({} up to sign)",
        st.eq1_raw, st.eq1_canonical
    ));
    out.line(format!("equation 3 per z0: {:?}", st.eq3_per_z0));
    out.line(format!(
        "equation 2 survivors: {}, jointly consistent: {}, rejected by dual test: {}",
        opt(st.eq2_survivors),
        opt(st.joint_survivors),
        opt(st.dual_rejected)
    ));
    if opts.cs_prune {
        out.line(format!("Cauchy-Schwarz pruned groups: {}", opt(st.cs_pruned_groups)));
    }
    let integral = result.candidates.iter().filter(|c| c.integral).count();
    out.line(format!(
        "candidates: {} emitted, {} integral",
        result.candidates.len(),
        integral
    ));
    out.line(format!("verdict: {:?}", result.certificate.verdict));
    if let Some(wit) = &result.certificate.witness {
        out.matrix("witness M:", &wit.matrix);
    }

    let mut doc = ResultDocument::new(
        Command::Factorize,
        Input {
            n: Some(pf.n),
            b: Some(pf.b),
            bprime: Some(bprime),
            w: Some(w),
            z0: Some(problem.z0().to_vec()),
            options: Some(opts),
            ..Input::default()
        },
    );
    let code = if result.certificate.verdict == Verdict::IsometricWitness {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    };
    doc.stats = Some(result.stats);
    doc.candidates = result.candidates;
    doc.certificate = Some(result.certificate);
    emit(&mut doc, json, started)?;
    Ok(code)
}

fn big(params: &BTreeMap<String, String>, key: &str, family: &str) -> Result<BigInt, CliError> {
    let raw = params
        .get(key)
        .ok_or_else(|| CliError::Parse(format!("--{key} is required for {family}")))?;
    raw.trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("--{key}: not an integer: {raw:?}")))
}

fn family_params(family: &str, params: &BTreeMap<String, String>) -> Result<FamilyParams, CliError> {
    let get = |k: &str| big(params, k, family);
    let fp = match family {
        "rank2" => FamilyParams::Rank2 {
            m: get("m")?,
            n: get("n")?,
            alpha: get("alpha")?,
            beta: get("beta")?,
            gamma: get("gamma")?,
        },
        "rank3" => FamilyParams::Rank3 { m: get("m")? },
        "rank3-variant" => FamilyParams::Rank3Variant {
            m: get("m")?,
            alpha: get("alpha")?,
            beta: get("beta")?,
            gamma: get("gamma")?,
        },
        other => return Err(CliError::Parse(format!("unknown family {other:?}"))),
    };
    fp.validate()?;
    Ok(fp)
}

fn squares_from(raw: &str) -> Result<Squares, CliError> {
    match raw {
        "2" => Ok(Squares::Two),
        "3" => Ok(Squares::Three),
        _ => Err(CliError::Parse(format!("--squares must be 2 or 3, got {raw:?}"))),
    }
}

/// Rebuilds the obstruction certificate from the echoed parameters.
fn obstruction_from(params: &BTreeMap<String, String>) -> Result<Certificate, CliError> {
    if let Some(family) = params.get("family") {
        return Ok(family_obstruction(&family_params(family, params)?)?);
    }
    let value = big(params, "value", "--N")?;
    let squares = squares_from(params.get("squares").map_or("", String::as_str))?;
    Ok(squares_obstruction(&value, squares))
}

fn parse_scan(raw: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Parse(format!("--scan expects LO..HI, got {raw:?}"));
    let (lo, hi) = raw.split_once("..").ok_or_else(bad)?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn describe_squares(out: &Printer, cert: &Certificate) {
    if let Detail::Squares {
        value,
        reduced,
        squares,
        equation,
    } = &cert.detail
    {
        out.line(format!("equation: {equation}"));
        if value != reduced {
            out.line(format!("reduced factor: {reduced}"));
        }
        if *squares == 3 && !value.is_zero() {
            let (t, r) = strip_fours(value);
            out.line(format!("{value} = 4^{t} · {r}, {r} ≡ {} (mod 8)", r.clone() % 8));
        }
    }
}

fn strip_fours(v: &BigInt) -> (u32, BigInt) {
    let four = BigInt::from(4);
    let mut r = v.clone();
    let mut t = 0;
    while (&r % &four).is_zero() {
        r /= &four;
        t += 1;
    }
    (t, r)
}

pub fn obstruct(
    family: Option<&str>,
    mut params: BTreeMap<String, String>,
    scan: Option<&str>,
    value: Option<String>,
    squares: Option<String>,
    json: Option<&Path>,
) -> Result<u8, CliError> {
    let started = Instant::now();
    let out = Printer::for_json(json);
    if let Some(raw) = scan {
        if family != Some("rank3") {
            return Err(CliError::Parse("--scan is only available for --family rank3".into()));
        }
        let (lo, hi) = parse_scan(raw)?;
        let rows = rank3_scan(lo..=hi);
        let hits = rows.iter().filter(|(_, ob)| *ob).count();
        for (m, ob) in &rows {
            out.line(format!("m = {m}: {}", if *ob { "obstructed" } else { "inconclusive" }));
        }
        out.line(format!("{hits} of {} values obstructed", rows.len()));
        return Ok(EXIT_OK);
    }
    match (family, value) {
        (Some(f), _) => {
            params.insert("family".into(), f.into());
        }
        (None, Some(v)) => {
            params.clear();
            params.insert("value".into(), v);
            params.insert("squares".into(), squares.unwrap_or_default());
        }
        (None, None) => return Err(CliError::Parse("pass --family or --N with --squares".into())),
    }
    let cert = obstruction_from(&params)?;
    out.line(format!("verdict: {:?}", cert.verdict));
    describe_squares(&out, &cert);
    let code = if cert.verdict.is_negative() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    };
    let mut doc = ResultDocument::new(
        Command::Obstruct,
        Input {
            params,
            ..Input::default()
        },
    );
    doc.certificate = Some(cert);
    emit(&mut doc, json, started)?;
    Ok(code)
}

fn oracle_source(bound: Option<u32>) -> ColumnSource {
    bound.map_or(ColumnSource::Enumerated, ColumnSource::Box)
}

pub fn oracle(file: &Path, bound: Option<u32>, json: Option<&Path>) -> Result<u8, CliError> {
    let started = Instant::now();
    let out = Printer::for_json(json);
    let pf = read_problem(file)?;
    let bprime = require_bprime(&pf)?;
    let b = GramForm::new(pf.b.clone())?;
    let bp = GramForm::new(bprime.clone())?;
    let found = brute_force_isometries(&b, &bp, oracle_source(bound))?;
    out.line(format!("{} integral isometries", found.len()));
    for (i, m) in found.iter().enumerate() {
        out.matrix(&format!("M[{i}]:"), m);
    }
    let code = if found.is_empty() { EXIT_NEGATIVE } else { EXIT_OK };
    let mut doc = ResultDocument::new(
        Command::Oracle,
        Input {
            n: Some(pf.n),
            b: Some(pf.b),
            bprime: Some(bprime),
            oracle_bound: bound,
            ..Input::default()
        },
    );
    doc.oracle_matrices = Some(found);
    emit(&mut doc, json, started)?;
    Ok(code)
}

fn is_isometry(m: &QMatrix, b: &QMatrix, bp: &QMatrix) -> bool {
    m.dim() == b.dim() && &(&m.transpose() * b) * m == *bp
}

fn field<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T, String> {
    v.as_ref().ok_or_else(|| format!("document has no {name}"))
}

fn check_decompose(doc: &ResultDocument) -> Result<Vec<String>, String> {
    let (b, w, phi) = (field(&doc.input.b, "B")?, field(&doc.input.w, "w")?, field(&doc.input.phi, "phi")?);
    let d = field(&doc.decomposition, "decomposition")?;
    let ctx = GradedContext::new(GramForm::new(b.clone()).map_err(|e| e.to_string())?, w.clone())
        .map_err(|e| e.to_string())?;
    let mut fails = Vec::new();
    if ctx.reassemble(d).mat() != phi {
        fails.push("decomposition does not reassemble to φ".into());
    }
    match ctx.full_decomposition(&Endo::new(phi.clone())) {
        Ok(fresh) if &fresh == d => {}
        Ok(_) => fails.push("decomposition differs from a fresh computation".into()),
        Err(e) => fails.push(e.to_string()),
    }
    Ok(fails)
}

fn check_factorize(doc: &ResultDocument) -> Result<Vec<String>, String> {
    let i = &doc.input;
    let (b, bp, w) = (field(&i.b, "B")?, field(&i.bprime, "Bprime")?, field(&i.w, "w")?);
    let cert = field(&doc.certificate, "certificate")?;
    let mut fails = Vec::new();
    let not_isometric = doc.candidates.iter().filter(|c| !is_isometry(&c.matrix, b, bp)).count();
    if not_isometric > 0 {
        fails.push(format!("{not_isometric} candidates do not satisfy MᵀBM = B′"));
    }
    let mislabelled = doc
        .candidates
        .iter()
        .filter(|c| c.integral != c.matrix.is_unimodular())
        .count();
    if mislabelled > 0 {
        fails.push(format!("{mislabelled} candidates have a wrong integrality flag"));
    }
    if let (Some(opts), Some(st)) = (&i.options, &doc.stats) {
        if opts.mode == SearchMode::All {
            let emitted = if opts.integral_only {
                st.integral_candidates
            } else {
                st.rational_candidates
            };
            if emitted.is_some_and(|n| n != doc.candidates.len()) {
                fails.push("candidate count disagrees with stats".into());
            }
        }
    }
    let problem = IsometryProblem::new(
        GramForm::new(b.clone()).map_err(|e| e.to_string())?,
        GramForm::new(bp.clone()).map_err(|e| e.to_string())?,
        w.clone(),
        i.z0.clone(),
    )
    .map_err(|e| e.to_string())?;
    let ok = verify_standalone(cert) != Some(false) && verify_certificate(cert, &problem);
    if !ok {
        fails.push(format!("certificate {:?} does not verify", cert.verdict));
    }
    Ok(fails)
}

fn check_obstruct(doc: &ResultDocument) -> Result<Vec<String>, String> {
    let cert = field(&doc.certificate, "certificate")?;
    let mut fails = Vec::new();
    if verify_standalone(cert) != Some(true) {
        fails.push(format!("certificate {:?} does not verify", cert.verdict));
    }
    match obstruction_from(&doc.input.params) {
        Ok(fresh) if &fresh == cert => {}
        Ok(_) => fails.push("certificate differs from the one the parameters give".into()),
        Err(e) => fails.push(e.to_string()),
    }
    Ok(fails)
}

fn check_oracle(doc: &ResultDocument) -> Result<Vec<String>, String> {
    let (b, bp) = (field(&doc.input.b, "B")?, field(&doc.input.bprime, "Bprime")?);
    let listed = field(&doc.oracle_matrices, "oracle_matrices")?;
    let mut fails = Vec::new();
    for (k, m) in listed.iter().enumerate() {
        if !m.is_unimodular() || !is_isometry(m, b, bp) {
            fails.push(format!("matrix {k} is not an integral isometry"));
        }
    }
    let gb = GramForm::new(b.clone()).map_err(|e| e.to_string())?;
    let gbp = GramForm::new(bp.clone()).map_err(|e| e.to_string())?;
    let fresh = brute_force_isometries(&gb, &gbp, oracle_source(doc.input.oracle_bound)).map_err(|e| e.to_string())?;
    if &fresh != listed {
        fails.push(format!("oracle now finds {} matrices, document lists {}", fresh.len(), listed.len()));
    }
    Ok(fails)
}

pub fn verify(path: &Path) -> Result<u8, CliError> {
    let text = read_text(path)?;
    let doc: ResultDocument =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let checked = match doc.command {
        Command::Decompose => check_decompose(&doc),
        Command::Factorize => check_factorize(&doc),
        Command::Obstruct => check_obstruct(&doc),
        Command::Oracle => check_oracle(&doc),
    };
    let fails = checked.unwrap_or_else(|e| vec![e]);
    if fails.is_empty() {
        println!("verified");
        Ok(EXIT_OK)
    } else {
        for f in &fails {
            println!("FAILED: {f}");
        }
        Ok(EXIT_NEGATIVE)
    }
}
