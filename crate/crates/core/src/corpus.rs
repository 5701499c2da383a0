//! File-level driver: checking sources against a prelude, corpus manifests
//! and the corpus run report.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::checker::{Category, Checker, Env};
use crate::lexer::{tokenize, TokenKind};
use crate::parser::{parse_module, DeclKind, Module};
use crate::solver::Solver;

/// One reported problem, located at a declaration (or at the offending
/// token for parse errors).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub file: String,
    pub line: usize,
    pub col: usize,
    pub category: Category,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error {}:{}:{} {}: {}", self.file, self.line, self.col, self.category, self.message)
    }
}

/// Outcome of checking one source file.
#[derive(Debug, Clone)]
pub struct FileReport {
    pub file: String,
    /// Lines printed by directives, in order.
    pub output: Vec<String>,
    pub diagnostic: Option<Diagnostic>,
    /// Number of `def` declarations accepted.
    pub definitions: usize,
    pub module: Option<Module>,
}

impl FileReport {
    pub fn ok(&self) -> bool {
        self.diagnostic.is_none()
    }
}

/// Does the source start a module that imports the prelude?
pub fn imports_prelude(src: &str) -> bool {
    let Ok(toks) = tokenize(src) else { return false };
    toks.windows(2).any(|w| {
        matches!(&w[0].kind, TokenKind::Ident(k) if k == "import") && matches!(&w[1].kind, TokenKind::Ident(_))
    })
}

/// Check `src` in `env`. Returns the report and the extended environment
/// (declarations up to the first error).
pub fn check_source(src: &str, file: &str, env: Env, solver: Arc<Solver>) -> (FileReport, Env) {
    let mut report =
        FileReport { file: file.to_string(), output: vec![], diagnostic: None, definitions: 0, module: None };
    let module = match parse_module(src, &env.shapes()) {
        Ok(m) => m,
        Err(e) => {
            report.diagnostic = Some(Diagnostic {
                file: file.to_string(),
                line: e.span.line,
                col: e.span.col,
                category: Category::ParseError,
                message: e.describe(),
            });
            return (report, env);
        }
    };
    let mut checker = Checker::new(env, solver);
    for decl in &module.decls {
        match checker.check_decl(decl) {
            Ok(lines) => {
                report.output.extend(lines);
                if matches!(decl.kind, DeclKind::Def { .. }) {
                    report.definitions += 1;
                }
            }
            Err(e) => {
                report.diagnostic = Some(Diagnostic {
                    file: file.to_string(),
                    line: decl.span.line,
                    col: decl.span.col,
                    category: e.category,
                    message: e.message,
                });
                break;
            }
        }
    }
    report.module = Some(module);
    (report, checker.env)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Checks,
    Fails(Category),
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Checks => f.write_str("CHECKS"),
            Expectation::Fails(c) => write!(f, "FAILS:{c}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub expect: Expectation,
    /// Path as written in the manifest, relative to it.
    pub rel: String,
    pub path: PathBuf,
    pub anchor: String,
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest, CorpusError> {
        let text = fs::read_to_string(path)
            .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Manifest::parse(&text, &root)
    }

    pub fn parse(text: &str, root: &Path) -> Result<Manifest, CorpusError> {
        let mut entries: Vec<ManifestEntry> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| CorpusError::Manifest { line: i + 1, message };
            let (head, anchor) = match line.split_once(" -- ") {
                Some((h, a)) => (h.trim(), a.trim().to_string()),
                None => (line, String::new()),
            };
            let fields: Vec<&str> = head.split_whitespace().collect();
            let [kw, expect, rel] = fields.as_slice() else {
                return Err(err(format!("expected `EXPECT <outcome> <path> -- <anchor>`, got `{line}`")));
            };
            if *kw != "EXPECT" {
                return Err(err(format!("unknown directive `{kw}`")));
            }
            let expect = match *expect {
                "CHECKS" => Expectation::Checks,
                other => match other.strip_prefix("FAILS:").and_then(Category::parse) {
                    Some(c) => Expectation::Fails(c),
                    None => return Err(err(format!("unknown outcome `{other}`"))),
                },
            };
            if entries.iter().any(|e| e.rel == *rel) {
                return Err(err(format!("`{rel}` is listed twice")));
            }
            entries.push(ManifestEntry { expect, rel: rel.to_string(), path: root.join(rel), anchor });
        }
        Ok(Manifest { root: root.to_path_buf(), entries })
    }

    /// Position of `file` in the manifest, if listed.
    pub fn position(&self, file: &Path) -> Option<usize> {
        let target = fs::canonicalize(file).ok()?;
        self.entries.iter().position(|e| fs::canonicalize(&e.path).ok().as_ref() == Some(&target))
    }
}

/// The prelude: every `CHECKS` file of a manifest, accumulated in order.
/// A file importing the prelude sees the declarations of the `CHECKS`
/// files listed before it (all of them when it is not listed).
pub struct Prelude {
    pub manifest: Manifest,
    pub solver: Arc<Solver>,
    /// `envs[i]`: the prelude visible to manifest entry `i`.
    envs: Vec<Env>,
    reports: Vec<FileReport>,
}

impl Prelude {
    pub fn new(manifest: Manifest, solver: Arc<Solver>) -> Prelude {
        Prelude { manifest, solver, envs: vec![Env::new()], reports: vec![] }
    }

    pub fn load(path: &Path, solver: Arc<Solver>) -> Result<Prelude, CorpusError> {
        Ok(Prelude::new(Manifest::load(path)?, solver))
    }

    /// Check manifest entries until the prelude for entry `i` is known.
    fn advance_to(&mut self, i: usize) -> Result<(), CorpusError> {
        while self.envs.len() <= i {
            let j = self.envs.len() - 1;
            let entry = self.manifest.entries[j].clone();
            let src = fs::read_to_string(&entry.path)
                .map_err(|source| CorpusError::Io { path: entry.path.display().to_string(), source })?;
            let prior = self.envs[j].clone();
            let start = if imports_prelude(&src) { prior.clone() } else { Env::new() };
            let base = start.len();
            let (report, after) = check_source(&src, &entry.rel, start, self.solver.clone());
            let mut next = prior;
            if entry.expect == Expectation::Checks && report.ok() {
                for (name, e) in after.iter().skip(base) {
                    if !next.contains(name) {
                        next.insert(name.clone(), e.clone());
                    }
                }
            }
            self.reports.push(report);
            self.envs.push(next);
        }
        Ok(())
    }

    /// Prelude for manifest entry `i`.
    pub fn env_at(&mut self, i: usize) -> Result<Env, CorpusError> {
        self.advance_to(i)?;
        Ok(self.envs[i].clone())
    }

    /// Prelude for an arbitrary file.
    pub fn env_for(&mut self, file: &Path) -> Result<Env, CorpusError> {
        let i = self.manifest.position(file).unwrap_or(self.manifest.entries.len());
        self.env_at(i)
    }

    /// Check every manifest entry (each exactly once) and compare with the
    /// expectations.
    pub fn run(&mut self) -> Result<CorpusReport, CorpusError> {
        let n = self.manifest.entries.len();
        self.advance_to(n)?;
        let results = self
            .manifest
            .entries
            .iter()
            .zip(&self.reports)
            .map(|(entry, report)| {
                let got = match &report.diagnostic {
                    None => Expectation::Checks,
                    Some(d) => Expectation::Fails(d.category),
                };
                EntryResult { entry: entry.clone(), got, report: report.clone() }
            })
            .collect();
        Ok(CorpusReport { results })
    }
}

#[derive(Debug, Clone)]
pub struct EntryResult {
    pub entry: ManifestEntry,
    pub got: Expectation,
    pub report: FileReport,
}

impl EntryResult {
    pub fn passed(&self) -> bool {
        self.got == self.entry.expect
    }
}

#[derive(Debug, Clone)]
pub struct CorpusReport {
    pub results: Vec<EntryResult>,
}

impl CorpusReport {
    pub fn mismatches(&self) -> usize {
        self.results.iter().filter(|r| !r.passed()).count()
    }

    pub fn checking_files(&self) -> usize {
        self.results.iter().filter(|r| r.got == Expectation::Checks && r.passed()).count()
    }

    pub fn failing_files(&self) -> usize {
        self.results.iter().filter(|r| matches!(r.got, Expectation::Fails(_)) && r.passed()).count()
    }

    pub fn definitions(&self) -> usize {
        self.results
            .iter()
            .filter(|r| r.entry.expect == Expectation::Checks && r.passed())
            .map(|r| r.report.definitions)
            .sum()
    }

    /// Deterministic text report; no timings.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let status = if r.passed() { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {} {}", r.entry.rel, r.entry.expect));
            if !r.passed() {
                out.push_str(&format!(" (got {})", r.got));
            }
            if r.entry.expect == Expectation::Checks && r.passed() {
                out.push_str(&format!(" [{} definitions]", r.report.definitions));
            }
            out.push('\n');
            if let Some(d) = &r.report.diagnostic {
                out.push_str(&format!("  {d}\n"));
            }
        }
        out.push_str(&format!(
            "summary: {} files, {} passed, {} mismatched; {} checking files with {} definitions, {} failing as expected\n",
            self.results.len(),
            self.results.len() - self.mismatches(),
            self.mismatches(),
            self.checking_files(),
            self.definitions(),
            self.failing_files(),
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver() -> Arc<Solver> {
        Arc::new(Solver::default())
    }

    #[test]
    fn manifest_lines() {
        let m = Manifest::parse(
            "# comment\nEXPECT CHECKS a.stt -- somewhere\n\nEXPECT FAILS:TopeFalse neg/b.stt -- x\n",
            Path::new("/c"),
        )
        .unwrap();
        assert_eq!(m.entries.len(), 2);
        assert_eq!(m.entries[1].expect, Expectation::Fails(Category::TopeFalse));
        assert_eq!(m.entries[1].path, Path::new("/c/neg/b.stt"));
        assert!(Manifest::parse("EXPECT MAYBE a.stt", Path::new("/")).is_err());
        assert!(Manifest::parse("EXPECT CHECKS a.stt\nEXPECT CHECKS a.stt", Path::new("/")).is_err());
    }

    #[test]
    fn reports_first_error_at_declaration() {
        let src = "postulate A : U\n\ndef x : A := y\ndef z : A := w\n";
        let (report, env) = check_source(src, "f.stt", Env::new(), solver());
        let d = report.diagnostic.unwrap();
        assert_eq!((d.line, d.col, d.category), (3, 1, Category::UnboundName));
        assert_eq!(d.to_string(), "error f.stt:3:1 UnboundName: unbound name `y`");
        assert!(env.contains("A") && !env.contains("x"));
    }

    #[test]
    fn parse_errors_are_located() {
        let (report, _) = check_source("def x : U := (U", "p.stt", Env::new(), solver());
        let d = report.diagnostic.unwrap();
        assert_eq!(d.category, Category::ParseError);
        assert_eq!((d.line, d.col), (1, 16));
    }

    #[test]
    fn directives_report() {
        let src = "postulate A : U\npostulate a : A\n#check (\\x -> x) a : A\n#normalize (\\x -> x) a ~> a\n#entails t | t === 0 |- t <= 1\n";
        let (report, _) = check_source(src, "d.stt", Env::new(), solver());
        assert!(report.ok(), "{:?}", report.diagnostic);
        assert_eq!(
            report.output,
            vec!["(\\x -> x) a : A".to_string(), "(\\x -> x) a ~> a".into(), "VALID t | t === 0 |- t <= 1".into()]
        );
    }

    #[test]
    fn redefinition() {
        let (report, _) = check_source("postulate A : U\npostulate A : U", "r.stt", Env::new(), solver());
        assert_eq!(report.diagnostic.unwrap().category, Category::Redefinition);
    }

    #[test]
    fn import_detection() {
        assert!(imports_prelude("-- x\nimport prelude\n"));
        assert!(!imports_prelude("def x : U := U"));
    }
}
