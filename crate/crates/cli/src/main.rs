use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use stt_core::checker::{Category, Checker, Env};
use stt_core::context::Context;
use stt_core::corpus::{check_source, imports_prelude, CorpusError, Diagnostic, Prelude};
use stt_core::parser::{parse_expr, parse_inclusion, parse_tope, ShapeTable};
use stt_core::printer::print_tope;
use stt_core::solver::{oracle, pushout_product, ShapeInclusion, Solver};
use stt_core::Tope;

const DEFAULT_PRELUDE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/manifest.txt");

const OK: u8 = 0;
const TYPE_ERROR: u8 = 1;
const PARSE_ERROR: u8 = 2;
const USAGE: u8 = 3;
const MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(name = "stt", version, about = "Checker for simplicial type theory with shapes and extension types")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolverFlags {
    /// Do not assume 0 and 1 are distinct endpoints.
    #[arg(long)]
    no_distinct_endpoints: bool,
}

impl SolverFlags {
    fn solver(&self) -> Arc<Solver> {
        Arc::new(Solver::new(!self.no_distinct_endpoints))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Type-check source files.
    Check {
        /// Emit diagnostics as JSON objects, one per line.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        flags: SolverFlags,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Decide a tope entailment.
    Tope {
        /// Comma-separated cube variables.
        #[arg(long, default_value = "")]
        vars: String,
        #[arg(long)]
        hyp: String,
        #[arg(long)]
        goal: String,
        /// Cross-check against the finite-chain model with chains up to N.
        #[arg(long, value_name = "N")]
        oracle: Option<usize>,
        #[command(flatten)]
        flags: SolverFlags,
    },
    /// Print the weak head normal form of an expression in a file's scope.
    Normalize {
        file: PathBuf,
        expr: String,
        #[command(flatten)]
        flags: SolverFlags,
    },
    /// Pushout product of two shape inclusions `VARS | SUB |- SUPER`.
    PushoutProduct {
        left: String,
        right: String,
        #[command(flatten)]
        flags: SolverFlags,
    },
    /// Corpus operations.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Check every manifest entry and compare with its expectation.
    Run {
        manifest: Option<PathBuf>,
        #[command(flatten)]
        flags: SolverFlags,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    let code = match cli.command {
        Command::Check { json, flags, files } => check(&files, json, flags.solver()),
        Command::Tope { vars, hyp, goal, oracle, flags } => tope(&vars, &hyp, &goal, oracle, &flags),
        Command::Normalize { file, expr, flags } => normalize(&file, &expr, flags.solver()),
        Command::PushoutProduct { left, right, flags } => pushout(&left, &right, &flags.solver()),
        Command::Corpus { command: CorpusCommand::Run { manifest, flags } } => {
            corpus_run(manifest.unwrap_or_else(prelude_path), flags.solver())
        }
    };
    ExitCode::from(code)
}

fn prelude_path() -> PathBuf {
    std::env::var_os("STT_PRELUDE").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_PRELUDE))
}

fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("stt: {msg}");
    USAGE
}

fn code_for(d: &Diagnostic) -> u8 {
    if d.category == Category::ParseError {
        PARSE_ERROR
    } else {
        TYPE_ERROR
    }
}

/// Lazily loaded prelude; files that do not import it never touch it.
struct Scope {
    solver: Arc<Solver>,
    prelude: Option<Prelude>,
}

impl Scope {
    fn new(solver: Arc<Solver>) -> Scope {
        Scope { solver, prelude: None }
    }

    fn prelude(&mut self) -> Result<&mut Prelude, CorpusError> {
        if self.prelude.is_none() {
            self.prelude = Some(Prelude::load(&prelude_path(), self.solver.clone())?);
        }
        Ok(self.prelude.as_mut().expect("loaded"))
    }

    fn env_for(&mut self, file: &Path, src: &str) -> Result<Env, CorpusError> {
        if imports_prelude(src) {
            self.prelude()?.env_for(file)
        } else {
            Ok(Env::new())
        }
    }

    fn shapes(&mut self) -> Result<ShapeTable, CorpusError> {
        Ok(self.prelude()?.env_for(Path::new(""))?.shapes())
    }
}

/// Check `file`, optionally printing directive output; returns the report
/// and final environment.
fn check_file(scope: &mut Scope, file: &Path, echo: bool) -> Result<(stt_core::corpus::FileReport, Env), u8> {
    let src = fs::read_to_string(file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    let env = scope.env_for(file, &src).map_err(usage)?;
    let (report, env) = check_source(&src, &file.display().to_string(), env, scope.solver.clone());
    if echo {
        for line in &report.output {
            println!("{line}");
        }
    }
    Ok((report, env))
}

fn check(files: &[PathBuf], as_json: bool, solver: Arc<Solver>) -> u8 {
    let mut scope = Scope::new(solver);
    let mut code = OK;
    for file in files {
        let report = match check_file(&mut scope, file, true) {
            Ok((report, _)) => report,
            Err(c) => return c,
        };
        if let Some(d) = &report.diagnostic {
            if as_json {
                let obj = json!({
                    "file": d.file,
                    "line": d.line,
                    "col": d.col,
                    "category": d.category.name(),
                    "message": d.message,
                });
                eprintln!("{obj}");
            } else {
                eprintln!("{d}");
            }
            code = code.max(code_for(d));
        }
    }
    code
}

fn split_vars(vars: &str) -> Vec<String> {
    vars.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect()
}

fn tope(vars: &str, hyp: &str, goal: &str, max_chain: Option<usize>, flags: &SolverFlags) -> u8 {
    let vars = split_vars(vars);
    let solver = flags.solver();
    let mut scope = Scope::new(solver.clone());
    let mut parse = |src: &str| {
        parse_tope(src, &vars, &ShapeTable::new()).or_else(|first| match scope.shapes() {
            Ok(shapes) => parse_tope(src, &vars, &shapes),
            Err(_) => Err(first),
        })
    };
    let (hyp, goal) = match (parse(hyp), parse(goal)) {
        (Ok(h), Ok(g)) => (h, g),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error <tope>:{e}");
            return PARSE_ERROR;
        }
    };
    let valid = solver.entails(&hyp, &goal);
    println!("{}", if valid { "VALID" } else { "INVALID" });
    if let Some(n) = max_chain {
        let expected = oracle(vars.len(), &hyp, &goal, n, solver.distinct_endpoints);
        if expected == valid {
            println!("AGREE");
        } else {
            println!("DISAGREE");
            return MISMATCH;
        }
    }
    OK
}

fn normalize(file: &Path, expr: &str, solver: Arc<Solver>) -> u8 {
    let mut scope = Scope::new(solver.clone());
    let (report, env) = match check_file(&mut scope, file, false) {
        Ok(r) => r,
        Err(c) => return c,
    };
    if let Some(d) = &report.diagnostic {
        eprintln!("{d}");
        return code_for(d);
    }
    let e = match parse_expr(expr, &env.shapes()) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error <expr>:{e}");
            return PARSE_ERROR;
        }
    };
    let checker = Checker::new(env, solver);
    let ctx = Context::new();
    if let Err(err) = checker.infer(&ctx, &e) {
        eprintln!("error <expr>:1:1 {}: {}", err.category, err.message);
        return TYPE_ERROR;
    }
    println!("{}", checker.show(&ctx, &checker.whnf(&ctx, &e)));
    OK
}

fn pushout(left: &str, right: &str, solver: &Solver) -> u8 {
    let mut parts = Vec::new();
    for (what, src) in [("left", left), ("right", right)] {
        let (vars, sub, sup) = match parse_inclusion(src, &ShapeTable::new()) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error <{what}>:{e}");
                return PARSE_ERROR;
            }
        };
        match ShapeInclusion::new(vars, sub, sup, solver) {
            Ok(j) => parts.push(j),
            Err(e) => {
                eprintln!("error <{what}>:1:1 {}: {e}", Category::TopeFalse);
                return TYPE_ERROR;
            }
        }
    }
    let p = pushout_product(&parts[0], &parts[1], solver);
    let vars = p.vars().to_vec();
    println!("{} | {} |- {}", vars.join(", "), grouped(p.sub(), &vars), print_tope(p.sup(), &vars));
    OK
}

/// Print `(a /\ b) \/ (c /\ d)` with the conjunctions parenthesised.
fn grouped(t: &Tope, vars: &[String]) -> String {
    match t {
        Tope::Or(l, r) => match (&**l, &**r) {
            (Tope::And(..), Tope::And(..)) => {
                format!("({}) \\/ ({})", print_tope(l, vars), print_tope(r, vars))
            }
            _ => print_tope(t, vars),
        },
        _ => print_tope(t, vars),
    }
}

fn corpus_run(manifest: PathBuf, solver: Arc<Solver>) -> u8 {
    let mut prelude = match Prelude::load(&manifest, solver) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    match prelude.run() {
        Ok(report) => {
            print!("{}", report.render());
            if report.mismatches() == 0 {
                OK
            } else {
                MISMATCH
            }
        }
        Err(e) => usage(e),
    }
}
