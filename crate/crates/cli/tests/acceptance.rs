//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use stt_core::checker::{Checker, Env};
use stt_core::context::Context;
use stt_core::corpus::{check_source, Prelude};
use stt_core::parser::{parse_module, Decl, DeclKind, ShapeTable};
use stt_core::printer::print_decl;
use stt_core::solver::{entails_with, pushout_product, shape_included, ShapeInclusion, Solver};
use stt_core::subst::alpha_eq;
use stt_core::{CubeTerm, Expr, Tope};

const GRID_LIMIT: Duration = Duration::from_secs(60);
const CORPUS_LIMIT: Duration = Duration::from_secs(10);
const GRID_CHAIN: usize = 4;
const MIN_CHECKING_FILES: usize = 17;
const MIN_DEFINITIONS: usize = 30;
const MIN_FAILING_FILES: usize = 8;
const BOT_PAIRS: usize = 200;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().expect("workspace root")
}

fn manifest() -> PathBuf {
    root().join("corpus/manifest.txt")
}

fn stt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stt"))
        .args(args)
        .current_dir(root())
        .env("STT_PRELUDE", manifest())
        .output()
        .expect("run stt")
}

// ----- an independent finite-chain model -------------------------------

/// Value of a cube term at `point` (indexed by de Bruijn level from the
/// innermost variable) in the chain `0 < … < top`.
fn value(c: &CubeTerm, point: &[u8], top: u8) -> u8 {
    match c {
        CubeTerm::Zero => 0,
        CubeTerm::One => top,
        CubeTerm::Var(i) => point[*i],
    }
}

fn eval(phi: &Tope, point: &[u8], top: u8) -> bool {
    match phi {
        Tope::Top => true,
        Tope::Bot => false,
        Tope::And(a, b) => eval(a, point, top) && eval(b, point, top),
        Tope::Or(a, b) => eval(a, point, top) || eval(b, point, top),
        Tope::Eq(x, y) => value(x, point, top) == value(y, point, top),
        Tope::Leq(x, y) => value(x, point, top) <= value(y, point, top),
    }
}

/// Entailment in every chain with 2..=max_chain elements.
fn model_entails(n_vars: usize, hyp: &Tope, goal: &Tope, max_chain: usize) -> bool {
    (2..=max_chain).all(|size| {
        let top = (size - 1) as u8;
        let total = size.pow(n_vars as u32);
        (0..total).all(|code| {
            let point: Vec<u8> = (0..n_vars).map(|k| ((code / size.pow(k as u32)) % size) as u8).collect();
            !eval(hyp, &point, top) || eval(goal, &point, top)
        })
    })
}

// ----- criterion 1 ------------------------------------------------------

/// Formulas over t = Var(1), s = Var(0): single atoms and binary/ternary
/// conjunctions and disjunctions of atoms.
fn grid_formulas() -> Vec<Tope> {
    use CubeTerm::{One, Var, Zero};
    let (t, s) = (Var(1), Var(0));
    let atoms = [
        Tope::Leq(t, s),
        Tope::Leq(s, t),
        Tope::Eq(t, s),
        Tope::Eq(t, Zero),
        Tope::Eq(t, One),
        Tope::Eq(s, Zero),
        Tope::Eq(s, One),
    ];
    let mut out: Vec<Tope> = atoms.to_vec();
    for join in [Tope::and as fn(Tope, Tope) -> Tope, Tope::or] {
        for a in &atoms {
            for b in &atoms {
                out.push(join(a.clone(), b.clone()));
            }
        }
        for a in &atoms {
            for b in &atoms {
                for c in &atoms {
                    out.push(join(join(a.clone(), b.clone()), c.clone()));
                }
            }
        }
    }
    out
}

fn criterion_grid() -> (bool, String) {
    let formulas = grid_formulas();
    let start = Instant::now();
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let chunk = formulas.len().div_ceil(workers);
    let disagreements: usize = std::thread::scope(|scope| {
        let handles: Vec<_> = formulas
            .chunks(chunk)
            .map(|hyps| {
                let formulas = &formulas;
                scope.spawn(move || {
                    let mut bad = 0;
                    for hyp in hyps {
                        for goal in formulas {
                            if entails_with(hyp, goal, true) != model_entails(2, hyp, goal, GRID_CHAIN) {
                                bad += 1;
                            }
                        }
                    }
                    bad
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("grid worker")).sum()
    });
    let elapsed = start.elapsed();
    let n = formulas.len() * formulas.len();
    let ok = disagreements == 0 && elapsed < GRID_LIMIT;
    (
        ok,
        format!(
            "solver/oracle grid: {n} sequents over {} formulas, {disagreements} disagreements, {:.2}s (limit {}s)",
            formulas.len(),
            elapsed.as_secs_f64(),
            GRID_LIMIT.as_secs()
        ),
    )
}

// ----- criterion 2 ------------------------------------------------------

fn corpus_shapes() -> ShapeTable {
    let src = std::fs::read_to_string(root().join("corpus/shapes.stt")).expect("shapes.stt");
    let (report, env) = check_source(&src, "shapes.stt", Env::new(), Arc::new(Solver::default()));
    assert!(report.ok(), "shapes.stt must check: {:?}", report.diagnostic);
    env.shapes()
}

fn criterion_battery() -> (bool, String) {
    let shapes = corpus_shapes();
    let solver = Solver::default();
    let cases = [
        ("BdDelta1", "Delta1", true),
        ("Lambda20", "Delta2", true),
        ("Lambda21", "Delta2", true),
        ("Lambda22", "Delta2", true),
        ("BdDelta2", "Delta2", true),
        ("Span", "Square", true),
        ("Cospan", "Square", true),
        ("Delta2", "Lambda21", false),
        ("Square", "Span", false),
    ];
    let mut failures = Vec::new();
    for (sub, sup, expected) in cases {
        let (a, b) = (&shapes[sub], &shapes[sup]);
        let got = shape_included(a, b, &solver).expect("same cube");
        let model = model_entails(a.arity(), &a.tope, &b.tope, GRID_CHAIN);
        if got != expected || model != expected {
            failures.push(format!("{sub}<:{sup} solver={got} model={model} expected={expected}"));
        }
    }
    let ok = failures.is_empty();
    let detail = if ok { String::new() } else { format!(" [{}]", failures.join("; ")) };
    (ok, format!("named-shape battery: {} inclusions, 7 valid and 2 invalid as expected{detail}", cases.len()))
}

// ----- criterion 3 ------------------------------------------------------

fn criterion_pushout() -> (bool, String) {
    use CubeTerm::{One, Var, Zero};
    let solver = Solver::default();
    let boundary = |v| Tope::or(Tope::Eq(v, Zero), Tope::Eq(v, One));
    let j = ShapeInclusion::new(vec!["t".into()], boundary(Var(0)), Tope::Top, &solver).expect("j");
    let k = ShapeInclusion::new(vec!["s".into()], boundary(Var(0)), Tope::Top, &solver).expect("k");
    let p = pushout_product(&j, &k, &solver);
    let square_boundary = Tope::or(boundary(Var(1)), boundary(Var(0)));
    let mutual = solver.entails(p.sub(), &square_boundary) && solver.entails(&square_boundary, p.sub());
    let shape = *p.sub()
        == Tope::or(Tope::and(boundary(Var(1)), Tope::Top), Tope::and(Tope::Top, boundary(Var(0))));

    let out = stt(&["pushout-product", "t | t === 0 \\/ t === 1 |- TOP", "s | s === 0 \\/ s === 1 |- TOP"]);
    let printed = String::from_utf8_lossy(&out.stdout).trim_end().to_string();
    let expected = "t, s | ((t === 0 \\/ t === 1) /\\ TOP) \\/ (TOP /\\ (s === 0 \\/ s === 1)) |- TOP /\\ TOP";
    let exact = out.status.success() && printed == expected;
    (
        mutual && shape && exact,
        format!("pushout product of boundary inclusions: mutual entailment {mutual}, (phi/\\zeta)\\/(psi/\\chi) form {shape}, CLI output exact {exact}"),
    )
}

// ----- criterion 4 ------------------------------------------------------

fn criterion_corpus() -> (bool, String) {
    let start = Instant::now();
    let mut prelude = Prelude::load(&manifest(), Arc::new(Solver::default())).expect("manifest");
    let report = prelude.run().expect("corpus run");
    let elapsed = start.elapsed();
    let checking = report.checking_files();
    let failing = report.failing_files();
    let defs = report.definitions();
    let ok = report.mismatches() == 0
        && checking >= MIN_CHECKING_FILES
        && defs >= MIN_DEFINITIONS
        && failing >= MIN_FAILING_FILES
        && elapsed < CORPUS_LIMIT;
    (
        ok,
        format!(
            "corpus: {checking} checking files (min {MIN_CHECKING_FILES}) with {defs} definitions (min {MIN_DEFINITIONS}), {failing} failing as expected (min {MIN_FAILING_FILES}), {} mismatches, {:.3}s (limit {}s)",
            report.mismatches(),
            elapsed.as_secs_f64(),
            CORPUS_LIMIT.as_secs()
        ),
    )
}

// ----- criterion 5 ------------------------------------------------------

fn criterion_golden() -> (bool, String) {
    let out = stt(&["check", "corpus/golden/compute.stt"]);
    let expected = std::fs::read(root().join("corpus/golden/compute.expected")).expect("golden file");
    let exact = out.status.success() && out.stdout == expected;
    let text = String::from_utf8_lossy(&out.stdout);
    let left = text.lines().any(|l| l == "fg 0 ~> xg");
    let identity = text.lines().any(|l| {
        l == "\\<t> -> xg : ext {t : I | TOP} -> Bg [ t === 0 \\/ t === 1 |-> recOR (t === 0 |-> xg | t === 1 |-> xg) ]"
    });
    (
        exact && left && identity,
        format!("golden strict computation: byte-exact {exact}, f 0 ~> left endpoint {left}, constant arrow checks {identity}"),
    )
}

// ----- criterion 6 ------------------------------------------------------

fn full_env() -> Env {
    let mut prelude = Prelude::load(&manifest(), Arc::new(Solver::default())).expect("manifest");
    prelude.env_for(Path::new("")).expect("prelude")
}

fn subject_reduction(env: &Env) -> (usize, Vec<String>) {
    let checker = Checker::new(env.clone(), Arc::new(Solver::default()));
    let ctx = Context::new();
    let mut n = 0;
    let mut failures = Vec::new();
    for (name, entry) in env.iter() {
        let Some(value) = &entry.value else { continue };
        n += 1;
        let nf = checker.whnf(&ctx, value);
        if let Err(e) = checker.check(&ctx, &nf, &entry.ty) {
            failures.push(format!("{name}: {}", e.message));
        }
    }
    (n, failures)
}

fn same_decl(a: &Decl, b: &Decl) -> bool {
    let opt = |x: &Option<stt_core::RcExpr>, y: &Option<stt_core::RcExpr>| match (x, y) {
        (None, None) => true,
        (Some(x), Some(y)) => alpha_eq(x, y),
        _ => false,
    };
    match (&a.kind, &b.kind) {
        (DeclKind::Def { name: n1, ty: t1, value: v1 }, DeclKind::Def { name: n2, ty: t2, value: v2 }) => {
            n1 == n2 && alpha_eq(t1, t2) && alpha_eq(v1, v2)
        }
        (DeclKind::Postulate { name: n1, ty: t1 }, DeclKind::Postulate { name: n2, ty: t2 }) => {
            n1 == n2 && alpha_eq(t1, t2)
        }
        (DeclKind::Check { expr: e1, ty: t1 }, DeclKind::Check { expr: e2, ty: t2 }) => {
            alpha_eq(e1, e2) && opt(t1, t2)
        }
        (DeclKind::Normalize { expr: e1, expected: x1 }, DeclKind::Normalize { expr: e2, expected: x2 }) => {
            alpha_eq(e1, e2) && opt(x1, x2)
        }
        (
            DeclKind::Entails { vars: v1, hyp: h1, goal: g1, .. },
            DeclKind::Entails { vars: v2, hyp: h2, goal: g2, .. },
        ) => v1.len() == v2.len() && h1 == h2 && g1 == g2,
        (DeclKind::Import(m1), DeclKind::Import(m2)) => m1 == m2,
        _ => false,
    }
}

fn round_trip(shapes: &ShapeTable) -> (usize, Vec<String>) {
    let mut prelude = Prelude::load(&manifest(), Arc::new(Solver::default())).expect("manifest");
    let report = prelude.run().expect("corpus run");
    let mut n = 0;
    let mut failures = Vec::new();
    for r in &report.results {
        let Some(module) = &r.report.module else { continue };
        for decl in &module.decls {
            n += 1;
            let text = print_decl(decl);
            match parse_module(&text, shapes) {
                Ok(m) if m.decls.len() == 1 && same_decl(decl, &m.decls[0]) => {}
                Ok(_) => failures.push(format!("{}: {text}", r.entry.rel)),
                Err(e) => failures.push(format!("{}: {text}: {e}", r.entry.rel)),
            }
        }
    }
    (n, failures)
}

/// Random pairs of same-typed globals are convertible under BOT; the
/// same pairs are not all convertible under TOP.
fn vacuous_conversion(env: &Env) -> (usize, usize, usize) {
    let checker = Checker::new(env.clone(), Arc::new(Solver::default()));
    let mut groups: Vec<(Arc<Expr>, Vec<Arc<Expr>>)> = Vec::new();
    for (name, entry) in env.iter() {
        let term = Expr::global(name.as_str());
        match groups.iter_mut().find(|(ty, _)| alpha_eq(ty, &entry.ty)) {
            Some((_, members)) => members.push(term),
            None => groups.push((entry.ty.clone(), vec![term])),
        }
    }
    groups.retain(|(_, members)| members.len() >= 2);
    let mut rng = StdRng::seed_from_u64(0x5177);
    let bot = Context::new().with_tope(Tope::Bot);
    let top = Context::new();
    let (mut pairs, mut bad, mut distinct_under_top) = (0, 0, 0);
    for _ in 0..BOT_PAIRS {
        let Some((ty, members)) = groups.choose(&mut rng) else { break };
        let pick: Vec<_> = members.choose_multiple(&mut rng, 2).cloned().collect();
        pairs += 1;
        if !checker.convertible(&bot, &pick[0], &pick[1], ty) {
            bad += 1;
        }
        if !checker.convertible(&top, &pick[0], &pick[1], ty) {
            distinct_under_top += 1;
        }
    }
    (pairs, bad, distinct_under_top)
}

fn criterion_properties() -> (bool, String) {
    let env = full_env();
    let (defs, sr_fail) = subject_reduction(&env);
    let (decls, rt_fail) = round_trip(&env.shapes());
    let (pairs, bot_fail, distinct) = vacuous_conversion(&env);
    let ok = sr_fail.is_empty() && rt_fail.is_empty() && bot_fail == 0 && pairs > 0 && distinct > 0;
    let mut detail = format!(
        "checker properties: subject reduction {}/{defs}, round-trip {}/{decls}, BOT-convertible {}/{pairs} ({distinct} of them distinct under TOP)",
        defs - sr_fail.len(),
        decls - rt_fail.len(),
        pairs - bot_fail
    );
    for f in sr_fail.iter().chain(&rt_fail).take(5) {
        detail.push_str(&format!("\n    {f}"));
    }
    (ok, detail)
}

// ----- criterion 7 ------------------------------------------------------

fn criterion_determinism() -> (bool, String) {
    let a = stt(&["corpus", "run"]);
    let b = stt(&["corpus", "run"]);
    let same = a.stdout == b.stdout && a.status.code() == b.status.code();
    let ok = same && a.status.success() && !a.stdout.is_empty();
    (ok, format!("determinism: two corpus runs byte-identical {same} ({} bytes)", a.stdout.len()))
}

type Criterion = fn() -> (bool, String);

fn main() {
    let criteria: [(&str, Criterion); 7] = [
        ("1", criterion_grid),
        ("2", criterion_battery),
        ("3", criterion_pushout),
        ("4", criterion_corpus),
        ("5", criterion_golden),
        ("6", criterion_properties),
        ("7", criterion_determinism),
    ];
    let mut failed = 0;
    for (id, run) in criteria {
        let (ok, detail) = run();
        println!("{} criterion {id} {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
