//! Pretty-printer producing parseable ASCII surface syntax.
//!
//! Binder names are taken from the hints stored in the syntax tree and
//! freshened so that no printed name is shadowed, clashes with a keyword
//! or captures a global referenced by the expression.

use std::collections::HashSet;

use crate::parser::{is_keyword, Decl, DeclKind};
use crate::subst::occurs_var;
use crate::syntax::{CubeTerm, Expr, Shape, Tope};

const LAM: u8 = 0;
const PROD: u8 = 1;
const APP: u8 = 2;
const ATOM: u8 = 3;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Lam(..) | Expr::ExtLam(..) | Expr::Pi(..) | Expr::Ext(..) => LAM,
        Expr::Sigma(..) => PROD,
        Expr::App(..)
        | Expr::CubeApp(..)
        | Expr::Fst(_)
        | Expr::Snd(_)
        | Expr::Refl(_)
        | Expr::Id(..)
        | Expr::J(_) => APP,
        _ => ATOM,
    }
}

fn collect_globals(e: &Expr, out: &mut HashSet<String>) {
    let mut go = |x: &Expr| collect_globals(x, out);
    match e {
        Expr::Global(n) => {
            out.insert(n.clone());
        }
        Expr::Var(_) | Expr::Universe | Expr::ShapeSort | Expr::Unit | Expr::Tt | Expr::ShapeType(_) => {}
        Expr::Pi(_, a, b) | Expr::Sigma(_, a, b) | Expr::App(a, b) | Expr::Pair(a, b) | Expr::Ann(a, b) => {
            go(a);
            go(b);
        }
        Expr::Lam(_, b) | Expr::Fst(b) | Expr::Snd(b) | Expr::Refl(b) | Expr::ExtLam(_, b) | Expr::CubeApp(b, _) => {
            go(b)
        }
        Expr::Id(a, x, y) => {
            go(a);
            go(x);
            go(y);
        }
        Expr::J(j) => {
            for x in [&j.ty, &j.from, &j.motive, &j.base, &j.to, &j.path] {
                go(x);
            }
        }
        Expr::Ext(x) => {
            go(&x.family);
            if let Some(b) = &x.boundary {
                go(&b.term);
            }
        }
        Expr::RecOr(bs) => bs.iter().for_each(|(_, a)| go(a)),
    }
}

/// Printer state: names of the term and cube variables in scope.
#[derive(Debug, Clone, Default)]
pub struct Printer {
    terms: Vec<String>,
    cubes: Vec<String>,
    globals: HashSet<String>,
}

impl Printer {
    pub fn new() -> Printer {
        Printer::default()
    }

    /// A printer for expressions scoped in a context with the given term and
    /// cube variable names (outermost first).
    pub fn in_scope(terms: &[String], cubes: &[String]) -> Printer {
        Printer { terms: terms.to_vec(), cubes: cubes.to_vec(), globals: HashSet::new() }
    }

    fn taken(&self, name: &str) -> bool {
        is_keyword(name)
            || self.globals.contains(name)
            || self.terms.iter().any(|n| n == name)
            || self.cubes.iter().any(|n| n == name)
    }

    fn fresh(&self, hint: &str, default: &str) -> String {
        let valid = hint.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && hint.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
        let base = if valid { hint } else { default };
        if !self.taken(base) {
            return base.to_string();
        }
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
        (1..).map(|i| format!("{stem}{i}")).find(|n| !self.taken(n)).expect("infinitely many names")
    }

    fn term_name(&self, i: usize) -> String {
        match self.terms.len().checked_sub(i + 1) {
            Some(p) => self.terms[p].clone(),
            None => format!("#{i}"),
        }
    }

    fn cube_name(&self, i: usize) -> String {
        match self.cubes.len().checked_sub(i + 1) {
            Some(p) => self.cubes[p].clone(),
            None => format!("#c{i}"),
        }
    }

    pub fn expr(&mut self, e: &Expr) -> String {
        let mut gs = HashSet::new();
        collect_globals(e, &mut gs);
        let saved = std::mem::replace(&mut self.globals, gs);
        let out = self.at(e, LAM);
        self.globals = saved;
        out
    }

    pub fn tope(&self, t: &Tope) -> String {
        self.tope_at(t, 0)
    }

    fn at(&mut self, e: &Expr, prec: u8) -> String {
        let s = self.raw(e);
        if level(e) < prec {
            format!("({s})")
        } else {
            s
        }
    }

    fn with_term<R>(&mut self, name: String, f: impl FnOnce(&mut Self) -> R) -> R {
        self.terms.push(name);
        let r = f(self);
        self.terms.pop();
        r
    }

    fn with_cubes<R>(&mut self, names: Vec<String>, f: impl FnOnce(&mut Self) -> R) -> R {
        let n = names.len();
        self.cubes.extend(names);
        let r = f(self);
        self.cubes.truncate(self.cubes.len() - n);
        r
    }

    fn fresh_cubes(&self, hints: &[String]) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        let mut probe = self.clone();
        for h in hints {
            let n = probe.fresh(h, "t");
            probe.cubes.push(n.clone());
            names.push(n);
        }
        names
    }

    fn raw(&mut self, e: &Expr) -> String {
        match e {
            Expr::Var(i) => self.term_name(*i),
            Expr::Global(n) => n.clone(),
            Expr::Universe => "U".into(),
            Expr::ShapeSort => "SHAPE".into(),
            Expr::Unit => "Unit".into(),
            Expr::Tt => "tt".into(),
            Expr::Pi(n, a, b) => {
                if occurs_var(b, 0) {
                    let x = self.fresh(n, "x");
                    let a = self.at(a, LAM);
                    let b = self.with_term(x.clone(), |p| p.at(b, LAM));
                    format!("({x} : {a}) -> {b}")
                } else {
                    let a = self.at(a, PROD);
                    let b = self.with_term("_".into(), |p| p.at(b, LAM));
                    format!("{a} -> {b}")
                }
            }
            Expr::Sigma(n, a, b) => {
                if occurs_var(b, 0) {
                    let x = self.fresh(n, "x");
                    let a = self.at(a, LAM);
                    let b = self.with_term(x.clone(), |p| p.at(b, PROD));
                    format!("({x} : {a}) * {b}")
                } else {
                    let a = self.at(a, APP);
                    let b = self.with_term("_".into(), |p| p.at(b, PROD));
                    format!("{a} * {b}")
                }
            }
            Expr::Lam(..) | Expr::ExtLam(..) => self.lambda(e),
            Expr::App(f, a) => format!("{} {}", self.at(f, APP), self.at(a, ATOM)),
            Expr::Pair(a, b) => format!("({}, {})", self.at(a, LAM), self.at(b, LAM)),
            Expr::Fst(p) => format!("fst {}", self.at(p, ATOM)),
            Expr::Snd(p) => format!("snd {}", self.at(p, ATOM)),
            Expr::Refl(x) => format!("refl {}", self.at(x, ATOM)),
            Expr::Id(a, x, y) => {
                format!("Id {} {} {}", self.at(a, ATOM), self.at(x, ATOM), self.at(y, ATOM))
            }
            Expr::J(j) => {
                let parts: Vec<String> = [&j.ty, &j.from, &j.motive, &j.base, &j.to, &j.path]
                    .into_iter()
                    .map(|x| self.at(x, ATOM))
                    .collect();
                format!("J {}", parts.join(" "))
            }
            Expr::Ext(x) => {
                let names = self.fresh_cubes(&x.shape.vars);
                let shape = self.shape_named(&x.shape, &names);
                self.with_cubes(names, |p| match &x.boundary {
                    None => format!("ext {shape} -> {}", p.at(&x.family, LAM)),
                    Some(b) => format!(
                        "ext {shape} -> {} [ {} |-> {} ]",
                        p.at(&x.family, PROD),
                        p.tope(&b.tope),
                        p.at(&b.term, LAM)
                    ),
                })
            }
            Expr::CubeApp(f, point) => {
                let f = self.at(f, APP);
                format!("{f} {}", self.point(point))
            }
            Expr::ShapeType(s) => {
                let names = self.fresh_cubes(&s.vars);
                self.shape_named(s, &names)
            }
            Expr::RecOr(branches) => {
                let parts: Vec<String> = branches
                    .iter()
                    .map(|(phi, a)| format!("{} |-> {}", self.tope(phi), self.at(a, LAM)))
                    .collect();
                format!("recOR ({})", parts.join(" | "))
            }
            Expr::Ann(a, t) => format!("({} : {})", self.at(a, LAM), self.at(t, LAM)),
        }
    }

    fn lambda(&mut self, e: &Expr) -> String {
        let mut binders = Vec::new();
        let mut pushed_terms = 0;
        let mut pushed_cubes = 0;
        let mut cur = e;
        loop {
            match cur {
                Expr::Lam(n, b) => {
                    let x = self.fresh(n, "x");
                    binders.push(x.clone());
                    self.terms.push(x);
                    pushed_terms += 1;
                    cur = b;
                }
                Expr::ExtLam(ns, b) => {
                    let names = self.fresh_cubes(ns);
                    binders.push(format!("<{}>", names.join(", ")));
                    pushed_cubes += names.len();
                    self.cubes.extend(names);
                    cur = b;
                }
                _ => break,
            }
        }
        let body = self.at(cur, LAM);
        self.terms.truncate(self.terms.len() - pushed_terms);
        self.cubes.truncate(self.cubes.len() - pushed_cubes);
        format!("\\{} -> {body}", binders.join(" "))
    }

    fn point(&self, point: &[CubeTerm]) -> String {
        if point.len() == 1 {
            self.cube(point[0])
        } else {
            let parts: Vec<String> = point.iter().map(|c| self.cube(*c)).collect();
            format!("<{}>", parts.join(", "))
        }
    }

    fn cube(&self, c: CubeTerm) -> String {
        match c {
            CubeTerm::Zero => "0".into(),
            CubeTerm::One => "1".into(),
            CubeTerm::Var(i) => self.cube_name(i),
        }
    }

    fn shape_named(&mut self, s: &Shape, names: &[String]) -> String {
        let binders = match names.len() {
            1 => names[0].clone(),
            _ => format!("({})", names.join(", ")),
        };
        let cube = match names.len() {
            0 => "1".to_string(),
            n => vec!["I"; n].join(" * "),
        };
        let tope = self.with_cubes(names.to_vec(), |p| p.tope(&s.tope));
        format!("{{{binders} : {cube} | {tope}}}")
    }

    fn tope_at(&self, t: &Tope, prec: u8) -> String {
        match t {
            Tope::Top => "TOP".into(),
            Tope::Bot => "BOT".into(),
            Tope::Eq(x, y) => format!("{} === {}", self.cube(*x), self.cube(*y)),
            Tope::Leq(x, y) => format!("{} <= {}", self.cube(*x), self.cube(*y)),
            Tope::Or(a, b) => {
                let s = format!("{} \\/ {}", self.tope_at(a, 0), self.tope_at(b, 1));
                if prec > 0 {
                    format!("({s})")
                } else {
                    s
                }
            }
            Tope::And(a, b) => {
                let s = format!("{} /\\ {}", self.tope_at(a, 1), self.tope_at(b, 2));
                if prec > 1 {
                    format!("({s})")
                } else {
                    s
                }
            }
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    Printer::new().expr(e)
}

/// Print a tope over the given cube variables (outermost first).
pub fn print_tope(t: &Tope, vars: &[String]) -> String {
    Printer::in_scope(&[], vars).tope(t)
}

pub fn print_decl(d: &Decl) -> String {
    let mut p = Printer::new();
    match &d.kind {
        DeclKind::Def { name, ty, value } => {
            format!("def {name} : {} := {}", p.expr(ty), p.expr(value))
        }
        DeclKind::Postulate { name, ty } => format!("postulate {name} : {}", p.expr(ty)),
        DeclKind::Check { expr, ty } => match ty {
            Some(t) => format!("#check {} : {}", p.expr(expr), p.expr(t)),
            None => format!("#check {}", p.expr(expr)),
        },
        DeclKind::Normalize { expr, expected } => match expected {
            Some(x) => format!("#normalize {} ~> {}", p.expr(expr), p.expr(x)),
            None => format!("#normalize {}", p.expr(expr)),
        },
        DeclKind::Entails { vars, hyp, goal, .. } => {
            let binders = match vars.len() {
                1 => vars[0].clone(),
                _ => format!("({})", vars.join(", ")),
            };
            format!("#entails {binders} | {} |- {}", print_tope(hyp, vars), print_tope(goal, vars))
        }
        DeclKind::Import(m) => format!("import {m}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, ShapeTable};
    use crate::subst::alpha_eq;
    use crate::syntax::{Boundary, RcExpr};
    use CubeTerm::{One, Var, Zero};

    fn roundtrip(e: &RcExpr) {
        let text = print_expr(e);
        let back = parse_expr(&text, &ShapeTable::new()).unwrap_or_else(|err| panic!("{text}: {err}"));
        assert!(alpha_eq(e, &back), "{text}");
    }

    #[test]
    fn identity_lambda() {
        assert_eq!(print_expr(&Expr::lam("", Expr::var(0))), "\\x -> x");
    }

    #[test]
    fn extension_type_suffix() {
        let d1 = Shape::new(vec!["t".into()], Tope::Top);
        let e = Expr::pi(
            "x",
            Expr::universe(),
            Expr::ext(
                d1,
                Expr::var(0),
                Some(Boundary {
                    tope: Tope::or(Tope::Eq(Var(0), Zero), Tope::Eq(Var(0), One)),
                    term: Expr::rec_bd(Var(0), Expr::global("a"), Expr::global("b")),
                }),
            ),
        );
        let s = print_expr(&e);
        assert_eq!(
            s,
            "(x : U) -> ext {t : I | TOP} -> x [ t === 0 \\/ t === 1 |-> recOR (t === 0 |-> a | t === 1 |-> b) ]"
        );
        roundtrip(&e);
    }

    #[test]
    fn capture_avoidance() {
        // \x -> \x -> x1 x   with a global named x1 in the body
        let e = Expr::lam(
            "x",
            Expr::lam("x", Expr::apps(Expr::global("x1"), [Expr::var(1), Expr::var(0)])),
        );
        let s = print_expr(&e);
        assert_eq!(s, "\\x x2 -> x1 x x2");
        roundtrip(&e);
    }

    #[test]
    fn nested_topes_keep_structure() {
        let t = Tope::and(Tope::or(Tope::Top, Tope::Bot), Tope::and(Tope::Top, Tope::Bot));
        assert_eq!(print_tope(&t, &[]), "(TOP \\/ BOT) /\\ (TOP /\\ BOT)");
    }

    #[test]
    fn sigma_and_arrows() {
        let e = Expr::pi(
            "A",
            Expr::universe(),
            Expr::sigma("x", Expr::var(0), Expr::pi("", Expr::id(Expr::var(1), Expr::var(0), Expr::var(0)), Expr::Unit.rc())),
        );
        assert_eq!(print_expr(&e), "(A : U) -> (x : A) * (Id A x x -> Unit)");
        roundtrip(&e);
    }
}
