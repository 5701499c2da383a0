//! Recursive-descent parser from tokens to the nameless kernel syntax.
//!
//! Names are resolved while parsing: local binders become de Bruijn
//! indices (term or cube, whichever the binder introduced), names of
//! registered shapes are inlined as shape literals, and every other name
//! becomes a `Global` reference checked later against the environment.

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::lexer::{tokenize, LexError, Span, Token, TokenKind};
use crate::solver::pushout_formula;
use crate::subst::{instantiate_cubes_tope, shift_terms};
use crate::syntax::{Boundary, CubeTerm, Expr, RcExpr, Shape, Tope};

/// Named shapes visible to the parser, e.g. `Delta2`.
pub type ShapeTable = IndexMap<String, Shape>;

pub const KEYWORDS: &[&str] = &[
    "def", "postulate", "import", "ext", "recOR", "recBD", "fst", "snd", "refl", "Id", "J", "U",
    "SHAPE", "Unit", "tt", "TOP", "BOT", "I", "Sigma", "pushout",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub expected: Vec<String>,
    pub span: Span,
}

impl ParseError {
    /// The message without its location.
    pub fn describe(&self) -> String {
        if self.expected.is_empty() {
            self.message.clone()
        } else {
            format!("{} (expected {})", self.message, self.expected.join(" or "))
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.describe())
    }
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> ParseError {
        ParseError { message: format!("unexpected character `{}`", e.ch), expected: vec![], span: e.span }
    }
}

#[derive(Debug, Clone)]
pub enum DeclKind {
    Def { name: String, ty: RcExpr, value: RcExpr },
    Postulate { name: String, ty: RcExpr },
    Check { expr: RcExpr, ty: Option<RcExpr> },
    Normalize { expr: RcExpr, expected: Option<RcExpr> },
    /// `hyp ⊢ goal` over `vars`; `text` is the directive as written.
    Entails { vars: Vec<String>, hyp: Tope, goal: Tope, text: String },
    Import(String),
}

#[derive(Debug, Clone)]
pub struct Decl {
    pub kind: DeclKind,
    pub span: Span,
}

impl Decl {
    pub fn name(&self) -> Option<&str> {
        match &self.kind {
            DeclKind::Def { name, .. } | DeclKind::Postulate { name, .. } => Some(name),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Module {
    pub decls: Vec<Decl>,
}

impl Module {
    pub fn imports_prelude(&self) -> bool {
        self.decls.iter().any(|d| matches!(&d.kind, DeclKind::Import(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Term,
    Cube,
}

/// One binder of a telescope.
enum Binder {
    Term(String, RcExpr),
    Cube(Shape),
}

enum LamBinder {
    Term(String),
    Cube(Vec<String>),
}

type PResult<T> = Result<T, ParseError>;

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    scope: Vec<(String, Kind)>,
    shapes: ShapeTable,
}

pub fn parse_module(src: &str, shapes: &ShapeTable) -> PResult<Module> {
    let mut p = Parser::new(src, shapes)?;
    let mut decls = Vec::new();
    while !p.at(&TokenKind::Eof) {
        decls.push(p.decl()?);
    }
    Ok(Module { decls })
}

/// Parse a closed expression.
pub fn parse_expr(src: &str, shapes: &ShapeTable) -> PResult<RcExpr> {
    let mut p = Parser::new(src, shapes)?;
    let e = p.expr()?;
    p.expect(TokenKind::Eof)?;
    Ok(e)
}

/// Parse a tope over the given cube variables (outermost first).
pub fn parse_tope(src: &str, vars: &[String], shapes: &ShapeTable) -> PResult<Tope> {
    let mut p = Parser::new(src, shapes)?;
    p.scope.extend(vars.iter().map(|v| (v.clone(), Kind::Cube)));
    let t = p.tope()?;
    p.expect(TokenKind::Eof)?;
    Ok(t)
}

/// Parse `t, s | sub |- sup` into variables and the two topes.
pub fn parse_inclusion(src: &str, shapes: &ShapeTable) -> PResult<(Vec<String>, Tope, Tope)> {
    let mut p = Parser::new(src, shapes)?;
    let mut vars = Vec::new();
    if !p.at(&TokenKind::Bar) {
        vars.push(p.name()?);
        while p.eat(&TokenKind::Comma) {
            vars.push(p.name()?);
        }
    }
    p.expect(TokenKind::Bar)?;
    p.scope.extend(vars.iter().map(|v| (v.clone(), Kind::Cube)));
    let sub = p.tope()?;
    p.expect(TokenKind::Turnstile)?;
    let sup = p.tope()?;
    p.expect(TokenKind::Eof)?;
    Ok((vars, sub, sup))
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, shapes: &ShapeTable) -> PResult<Parser<'a>> {
        Ok(Parser { src, toks: tokenize(src)?, pos: 0, scope: Vec::new(), shapes: shapes.clone() })
    }

    // ----- token helpers -------------------------------------------------

    fn peek(&self) -> &TokenKind {
        &self.toks[self.pos].kind
    }

    fn peek_at(&self, n: usize) -> &TokenKind {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].kind
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn at(&self, k: &TokenKind) -> bool {
        self.peek() == k
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(x) if x == w)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, k: &TokenKind) -> bool {
        if self.at(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let found = self.peek().to_string();
        Err(ParseError {
            message: format!("unexpected {found}"),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            span: self.span(),
        })
    }

    fn fail<T>(&self, span: Span, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { message: message.into(), expected: vec![], span })
    }

    fn expect(&mut self, k: TokenKind) -> PResult<Token> {
        if self.at(&k) {
            Ok(self.bump())
        } else {
            self.error(&[&k.to_string()])
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.error(&[&format!("`{w}`")])
        }
    }

    /// A non-keyword identifier.
    fn name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            TokenKind::Ident(x) if !is_keyword(&x) => {
                self.bump();
                Ok(x)
            }
            _ => self.error(&["a name"]),
        }
    }

    // ----- scope ---------------------------------------------------------

    fn push(&mut self, name: &str, kind: Kind) {
        self.scope.push((name.to_string(), kind));
    }

    fn pop(&mut self, n: usize) {
        self.scope.truncate(self.scope.len() - n);
    }

    fn resolve(&self, name: &str) -> Option<(Kind, usize)> {
        let mut counts = [0usize; 2];
        for (n, k) in self.scope.iter().rev() {
            let slot = (*k == Kind::Cube) as usize;
            if n == name {
                return Some((*k, counts[slot]));
            }
            counts[slot] += 1;
        }
        None
    }

    // ----- declarations --------------------------------------------------

    fn decl(&mut self) -> PResult<Decl> {
        let span = self.span();
        let kind = match self.peek().clone() {
            TokenKind::Ident(w) if w == "def" => {
                self.bump();
                let name = self.name()?;
                let binders = self.groups()?;
                self.expect(TokenKind::Colon)?;
                let ty = self.expr()?;
                self.expect(TokenKind::ColonEq)?;
                let value = self.expr()?;
                self.pop_binders(&binders);
                let ty = fold_pi(&binders, ty);
                let value = fold_lam(&binders, value);
                if let (Expr::ShapeSort, Expr::ShapeType(shape)) = (&*ty, &*value) {
                    self.shapes.insert(name.clone(), shape.clone());
                }
                DeclKind::Def { name, ty, value }
            }
            TokenKind::Ident(w) if w == "postulate" => {
                self.bump();
                let name = self.name()?;
                let binders = self.groups()?;
                self.expect(TokenKind::Colon)?;
                let ty = self.expr()?;
                self.pop_binders(&binders);
                DeclKind::Postulate { name, ty: fold_pi(&binders, ty) }
            }
            TokenKind::Ident(w) if w == "import" => {
                self.bump();
                DeclKind::Import(self.name()?)
            }
            TokenKind::Directive(d) if d == "check" => {
                self.bump();
                let expr = self.expr()?;
                let ty = if self.eat(&TokenKind::Colon) { Some(self.expr()?) } else { None };
                DeclKind::Check { expr, ty }
            }
            TokenKind::Directive(d) if d == "normalize" => {
                self.bump();
                let expr = self.expr()?;
                let expected = if self.eat(&TokenKind::Squiggle) { Some(self.expr()?) } else { None };
                DeclKind::Normalize { expr, expected }
            }
            TokenKind::Directive(d) if d == "entails" => {
                self.bump();
                let start = self.span().start;
                let (vars, hyp, goal) = self.entails_body()?;
                let end = self.toks[self.pos.saturating_sub(1)].span.end;
                let text = self.src[start..end].to_string();
                DeclKind::Entails { vars, hyp, goal, text }
            }
            _ => return self.error(&["`def`", "`postulate`", "`import`", "a directive"]),
        };
        Ok(Decl { kind, span })
    }

    fn entails_body(&mut self) -> PResult<(Vec<String>, Tope, Tope)> {
        let vars_form = match self.peek() {
            TokenKind::Ident(_) => self.peek_at(1) == &TokenKind::Bar,
            TokenKind::LParen => {
                let mut i = 1;
                loop {
                    match self.peek_at(i) {
                        TokenKind::Ident(_) | TokenKind::Comma => i += 1,
                        TokenKind::RParen => break self.peek_at(i + 1) == &TokenKind::Bar,
                        _ => break false,
                    }
                }
            }
            _ => false,
        };
        if vars_form {
            let vars = self.cube_binders()?;
            self.expect(TokenKind::Bar)?;
            for v in &vars {
                self.push(v, Kind::Cube);
            }
            let hyp = self.tope()?;
            self.expect(TokenKind::Turnstile)?;
            let goal = self.tope()?;
            self.pop(vars.len());
            return Ok((vars, hyp, goal));
        }
        let span = self.span();
        let sub = self.shape_expr()?;
        self.expect(TokenKind::Subset)?;
        let sup = self.shape_expr()?;
        if sub.arity() != sup.arity() {
            return self.fail(
                span,
                format!("shapes live in different cubes ({} vs {} variables)", sub.arity(), sup.arity()),
            );
        }
        Ok((sub.vars.clone(), sub.tope, sup.tope))
    }

    fn shape_expr(&mut self) -> PResult<Shape> {
        let span = self.span();
        let e = self.prod()?;
        match &*e {
            Expr::ShapeType(s) => Ok(s.clone()),
            _ => self.fail(span, "expected a shape"),
        }
    }

    /// `t` or `(t, s)` or `()`.
    fn cube_binders(&mut self) -> PResult<Vec<String>> {
        if self.eat(&TokenKind::LParen) {
            let mut vars = Vec::new();
            if !self.at(&TokenKind::RParen) {
                vars.push(self.name()?);
                while self.eat(&TokenKind::Comma) {
                    vars.push(self.name()?);
                }
            }
            self.expect(TokenKind::RParen)?;
            Ok(vars)
        } else {
            Ok(vec![self.name()?])
        }
    }

    // ----- telescopes ----------------------------------------------------

    /// If a binder group `(x y : A)` or `((t, s) : S)` starts at token
    /// offset `i`, the offset just past its closing parenthesis.
    fn scan_group(&self, mut i: usize) -> Option<usize> {
        if self.peek_at(i) != &TokenKind::LParen {
            return None;
        }
        i += 1;
        match self.peek_at(i) {
            TokenKind::Ident(x) if !is_keyword(x) => {
                while matches!(self.peek_at(i), TokenKind::Ident(x) if !is_keyword(x)) {
                    i += 1;
                }
            }
            TokenKind::LParen => {
                i += 1;
                loop {
                    match self.peek_at(i) {
                        TokenKind::Ident(_) | TokenKind::Comma => i += 1,
                        TokenKind::RParen => break,
                        _ => return None,
                    }
                }
                i += 1;
            }
            _ => return None,
        }
        if self.peek_at(i) != &TokenKind::Colon {
            return None;
        }
        let mut depth = 1usize;
        loop {
            i += 1;
            match self.peek_at(i) {
                TokenKind::LParen | TokenKind::LBrace | TokenKind::LBrack => depth += 1,
                TokenKind::RParen | TokenKind::RBrace | TokenKind::RBrack => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i + 1);
                    }
                }
                TokenKind::Eof => return None,
                _ => {}
            }
        }
    }

    fn at_pi_telescope(&self) -> bool {
        let mut i = 0;
        loop {
            match self.scan_group(i) {
                None => return false,
                Some(j) => match self.peek_at(j) {
                    TokenKind::Arrow => return true,
                    TokenKind::LParen => i = j,
                    _ => return false,
                },
            }
        }
    }

    fn at_sigma_group(&self) -> bool {
        matches!(self.scan_group(0), Some(j) if self.peek_at(j) == &TokenKind::Star)
    }

    /// Zero or more binder groups; binders are left in scope.
    fn groups(&mut self) -> PResult<Vec<Binder>> {
        let mut out = Vec::new();
        while self.scan_group(0).is_some() {
            out.extend(self.group()?);
        }
        Ok(out)
    }

    fn group(&mut self) -> PResult<Vec<Binder>> {
        let span = self.span();
        self.expect(TokenKind::LParen)?;
        let (names, tuple) = if self.at(&TokenKind::LParen) {
            (self.cube_binders()?, true)
        } else {
            let mut names = vec![self.name()?];
            while !self.at(&TokenKind::Colon) {
                names.push(self.name()?);
            }
            (names, false)
        };
        self.expect(TokenKind::Colon)?;
        let ty = self.expr()?;
        self.expect(TokenKind::RParen)?;
        if let Expr::ShapeType(shape) = &*ty {
            if (names.len() != shape.arity()) || (!tuple && names.len() != 1) {
                return self.fail(
                    span,
                    format!("shape has {} variables but {} names are bound", shape.arity(), names.len()),
                );
            }
            for n in &names {
                self.push(n, Kind::Cube);
            }
            return Ok(vec![Binder::Cube(shape.renamed(names))]);
        }
        if tuple {
            return self.fail(span, "a tuple of names can only bind cube variables of a shape");
        }
        let mut out = Vec::new();
        for (i, n) in names.iter().enumerate() {
            out.push(Binder::Term(n.clone(), shift_terms(&ty, i, 0)));
            self.push(n, Kind::Term);
        }
        Ok(out)
    }

    fn pop_binders(&mut self, binders: &[Binder]) -> usize {
        let n = binders
            .iter()
            .map(|b| match b {
                Binder::Term(..) => 1,
                Binder::Cube(s) => s.arity(),
            })
            .sum();
        self.pop(n);
        n
    }

    // ----- expressions ---------------------------------------------------

    fn expr(&mut self) -> PResult<RcExpr> {
        if self.at(&TokenKind::Lambda) {
            return self.lambda();
        }
        if self.at_word("ext") {
            return self.ext();
        }
        if self.at_word("Sigma") {
            self.bump();
            let binders = self.group()?;
            self.expect(TokenKind::Comma)?;
            let body = self.expr()?;
            self.pop_binders(&binders);
            return match binders.into_iter().next() {
                Some(Binder::Term(n, a)) => Ok(Expr::sigma(n, a, body)),
                _ => self.error(&["a type binder"]),
            };
        }
        if self.at_pi_telescope() {
            let mut binders = Vec::new();
            while !self.at(&TokenKind::Arrow) {
                binders.extend(self.group()?);
            }
            self.expect(TokenKind::Arrow)?;
            let body = self.expr()?;
            self.pop_binders(&binders);
            return Ok(fold_pi(&binders, body));
        }
        let lhs = self.prod()?;
        if !self.eat(&TokenKind::Arrow) {
            return Ok(lhs);
        }
        if let Expr::ShapeType(shape) = &*lhs {
            for _ in 0..shape.arity() {
                self.push("", Kind::Cube);
            }
            let family = self.expr()?;
            self.pop(shape.arity());
            return Ok(Expr::ext(shape.clone(), family, None));
        }
        self.push("", Kind::Term);
        let cod = self.expr()?;
        self.pop(1);
        Ok(Expr::pi("", lhs, cod))
    }

    fn lambda(&mut self) -> PResult<RcExpr> {
        self.expect(TokenKind::Lambda)?;
        let mut binders = Vec::new();
        let mut bound = 0;
        while !self.at(&TokenKind::Arrow) {
            if self.eat(&TokenKind::Lt) {
                let mut names = Vec::new();
                if !self.at(&TokenKind::Gt) {
                    names.push(self.name()?);
                    while self.eat(&TokenKind::Comma) {
                        names.push(self.name()?);
                    }
                }
                self.expect(TokenKind::Gt)?;
                for n in &names {
                    self.push(n, Kind::Cube);
                }
                bound += names.len();
                binders.push(LamBinder::Cube(names));
            } else {
                let n = match self.peek() {
                    TokenKind::Ident(_) => self.name()?,
                    _ => return self.error(&["a name", "`<`", "`->`"]),
                };
                self.push(&n, Kind::Term);
                bound += 1;
                binders.push(LamBinder::Term(n));
            }
        }
        if binders.is_empty() {
            return self.error(&["a name", "`<`"]);
        }
        self.expect(TokenKind::Arrow)?;
        let body = self.expr()?;
        self.pop(bound);
        Ok(binders.into_iter().rev().fold(body, |b, binder| match binder {
            LamBinder::Term(n) => Expr::lam(n, b),
            LamBinder::Cube(ns) => Expr::ext_lam(ns, b),
        }))
    }

    fn ext(&mut self) -> PResult<RcExpr> {
        self.expect_word("ext")?;
        let shape = if self.scan_group(0).is_some() {
            let span = self.span();
            match self.group()?.pop() {
                Some(Binder::Cube(shape)) => {
                    self.pop(shape.arity());
                    shape
                }
                _ => return self.fail(span, "`ext` binds the variables of a shape"),
            }
        } else {
            let span = self.span();
            let e = self.atom()?;
            match &*e {
                Expr::ShapeType(s) => s.clone(),
                _ => return self.fail(span, "`ext` expects a shape"),
            }
        };
        for v in &shape.vars {
            self.push(v, Kind::Cube);
        }
        self.expect(TokenKind::Arrow)?;
        let family = self.expr()?;
        let boundary = if self.eat(&TokenKind::LBrack) {
            let tope = self.tope()?;
            self.expect(TokenKind::MapsTo)?;
            let term = self.expr()?;
            self.expect(TokenKind::RBrack)?;
            Some(Boundary { tope, term })
        } else {
            None
        };
        self.pop(shape.arity());
        Ok(Expr::ext(shape, family, boundary))
    }

    fn prod(&mut self) -> PResult<RcExpr> {
        if self.at_sigma_group() {
            let span = self.span();
            let binders = self.group()?;
            self.expect(TokenKind::Star)?;
            let body = self.prod()?;
            self.pop_binders(&binders);
            return match binders.into_iter().next() {
                Some(Binder::Term(n, a)) => Ok(Expr::sigma(n, a, body)),
                _ => self.fail(span, "a dependent pair binds a term variable"),
            };
        }
        let span = self.span();
        let lhs = self.app()?;
        if !self.eat(&TokenKind::Star) {
            return Ok(lhs);
        }
        self.push("", Kind::Term);
        let rhs = self.prod()?;
        self.pop(1);
        match (&*lhs, &*rhs) {
            (Expr::ShapeType(a), Expr::ShapeType(b)) => Ok(Expr::ShapeType(a.product(b)).rc()),
            (Expr::ShapeType(_), _) | (_, Expr::ShapeType(_)) => {
                self.fail(span, "cannot multiply a shape with a type")
            }
            _ => Ok(Expr::sigma("", lhs, rhs)),
        }
    }

    fn at_cube_arg(&self) -> bool {
        match self.peek() {
            TokenKind::Num(_) | TokenKind::Lt => true,
            TokenKind::Ident(x) => matches!(self.resolve(x), Some((Kind::Cube, _))),
            _ => false,
        }
    }

    fn at_atom(&self) -> bool {
        match self.peek() {
            TokenKind::LParen | TokenKind::LBrace => true,
            TokenKind::Ident(x) => {
                !is_keyword(x) || matches!(x.as_str(), "U" | "SHAPE" | "Unit" | "tt" | "recOR")
            }
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<RcExpr> {
        let mut head = self.head()?;
        loop {
            if self.at_cube_arg() {
                let point = self.cube_point()?;
                head = Expr::cube_app(head, point);
            } else if self.at_atom() {
                let arg = self.atom()?;
                head = Expr::app(head, arg);
            } else {
                return Ok(head);
            }
        }
    }

    /// A cube argument: `0`, `1`, a cube variable or `<c, ...>`.
    fn cube_point(&mut self) -> PResult<Vec<CubeTerm>> {
        if self.eat(&TokenKind::Lt) {
            let mut point = Vec::new();
            if !self.at(&TokenKind::Gt) {
                point.push(self.cube_term()?);
                while self.eat(&TokenKind::Comma) {
                    point.push(self.cube_term()?);
                }
            }
            self.expect(TokenKind::Gt)?;
            Ok(point)
        } else {
            Ok(vec![self.cube_term()?])
        }
    }

    fn cube_term(&mut self) -> PResult<CubeTerm> {
        match self.peek().clone() {
            TokenKind::Num(n) if n == "0" => {
                self.bump();
                Ok(CubeTerm::Zero)
            }
            TokenKind::Num(n) if n == "1" => {
                self.bump();
                Ok(CubeTerm::One)
            }
            TokenKind::Ident(x) => match self.resolve(&x) {
                Some((Kind::Cube, i)) => {
                    self.bump();
                    Ok(CubeTerm::Var(i))
                }
                _ => {
                    let span = self.span();
                    self.fail(span, format!("`{x}` is not a cube variable"))
                }
            },
            _ => self.error(&["`0`", "`1`", "a cube variable"]),
        }
    }

    /// Keyword applications with fixed arity, or an atom.
    fn head(&mut self) -> PResult<RcExpr> {
        let word = match self.peek() {
            TokenKind::Ident(x) => x.clone(),
            _ => return self.atom(),
        };
        match word.as_str() {
            "fst" | "snd" | "refl" => {
                self.bump();
                let a = self.atom()?;
                Ok(match word.as_str() {
                    "fst" => Expr::fst(a),
                    "snd" => Expr::snd(a),
                    _ => Expr::refl(a),
                })
            }
            "Id" => {
                self.bump();
                let (a, x, y) = (self.atom()?, self.atom()?, self.atom()?);
                Ok(Expr::id(a, x, y))
            }
            "J" => {
                self.bump();
                let mut args = Vec::with_capacity(6);
                for _ in 0..6 {
                    args.push(self.atom()?);
                }
                let mut it = args.into_iter();
                let mut next = || it.next().expect("six arguments");
                Ok(Expr::J(Box::new(crate::syntax::JElim {
                    ty: next(),
                    from: next(),
                    motive: next(),
                    base: next(),
                    to: next(),
                    path: next(),
                }))
                .rc())
            }
            "recBD" => {
                self.bump();
                let t = self.cube_term()?;
                let (a, b) = (self.atom()?, self.atom()?);
                Ok(Expr::rec_bd(t, a, b))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> PResult<RcExpr> {
        let span = self.span();
        match self.peek().clone() {
            TokenKind::Ident(x) => {
                match x.as_str() {
                    "U" => {
                        self.bump();
                        return Ok(Expr::universe());
                    }
                    "SHAPE" => {
                        self.bump();
                        return Ok(Expr::ShapeSort.rc());
                    }
                    "Unit" => {
                        self.bump();
                        return Ok(Expr::Unit.rc());
                    }
                    "tt" => {
                        self.bump();
                        return Ok(Expr::Tt.rc());
                    }
                    "recOR" => return self.rec_or(),
                    _ if is_keyword(&x) => {
                        return self.error(&["an expression"]);
                    }
                    _ => {}
                }
                self.bump();
                match self.resolve(&x) {
                    Some((Kind::Term, i)) => Ok(Expr::var(i)),
                    Some((Kind::Cube, _)) => {
                        self.fail(span, format!("cube variable `{x}` used as a term"))
                    }
                    None => match self.shapes.get(&x) {
                        Some(shape) => Ok(Expr::ShapeType(shape.clone()).rc()),
                        None => Ok(Expr::global(x)),
                    },
                }
            }
            TokenKind::LParen => {
                self.bump();
                let e = self.expr()?;
                if self.eat(&TokenKind::RParen) {
                    return Ok(e);
                }
                if self.eat(&TokenKind::Colon) {
                    let ty = self.expr()?;
                    self.expect(TokenKind::RParen)?;
                    return Ok(Expr::Ann(e, ty).rc());
                }
                if self.at(&TokenKind::Comma) {
                    let mut items = vec![e];
                    while self.eat(&TokenKind::Comma) {
                        items.push(self.expr()?);
                    }
                    self.expect(TokenKind::RParen)?;
                    let last = items.pop().expect("two items");
                    return Ok(items.into_iter().rev().fold(last, |acc, a| Expr::pair(a, acc)));
                }
                self.error(&["`)`", "`:`", "`,`"])
            }
            TokenKind::LBrace => Ok(Expr::ShapeType(self.shape_literal()?).rc()),
            _ => self.error(&["an expression"]),
        }
    }

    fn rec_or(&mut self) -> PResult<RcExpr> {
        self.expect_word("recOR")?;
        self.expect(TokenKind::LParen)?;
        let mut branches = Vec::new();
        loop {
            let phi = self.tope()?;
            self.expect(TokenKind::MapsTo)?;
            let a = self.expr()?;
            branches.push((phi, a));
            if !self.eat(&TokenKind::Bar) {
                break;
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(Expr::rec_or(branches))
    }

    /// `{ (t, s) : I * I | tope }`
    fn shape_literal(&mut self) -> PResult<Shape> {
        self.expect(TokenKind::LBrace)?;
        let vars = self.cube_binders()?;
        self.expect(TokenKind::Colon)?;
        let span = self.span();
        let dim = if matches!(self.peek(), TokenKind::Num(n) if n == "1") {
            self.bump();
            0
        } else {
            self.expect_word("I")?;
            let mut dim = 1;
            while self.eat(&TokenKind::Star) {
                self.expect_word("I")?;
                dim += 1;
            }
            dim
        };
        if dim != vars.len() {
            return self.fail(span, format!("cube of dimension {dim} bound by {} names", vars.len()));
        }
        self.expect(TokenKind::Bar)?;
        for v in &vars {
            self.push(v, Kind::Cube);
        }
        let tope = self.tope()?;
        self.pop(vars.len());
        self.expect(TokenKind::RBrace)?;
        Ok(Shape::new(vars, tope))
    }

    // ----- topes ---------------------------------------------------------

    fn tope(&mut self) -> PResult<Tope> {
        let mut t = self.tope_and()?;
        while self.eat(&TokenKind::Or) {
            t = Tope::or(t, self.tope_and()?);
        }
        Ok(t)
    }

    fn tope_and(&mut self) -> PResult<Tope> {
        let mut t = self.tope_atom()?;
        while self.eat(&TokenKind::And) {
            t = Tope::and(t, self.tope_atom()?);
        }
        Ok(t)
    }

    fn tope_atom(&mut self) -> PResult<Tope> {
        if self.eat(&TokenKind::LParen) {
            let t = self.tope()?;
            self.expect(TokenKind::RParen)?;
            return Ok(t);
        }
        if self.eat_word("TOP") {
            return Ok(Tope::Top);
        }
        if self.eat_word("BOT") {
            return Ok(Tope::Bot);
        }
        if self.eat_word("pushout") {
            self.expect(TokenKind::LParen)?;
            let phi = self.tope()?;
            self.expect(TokenKind::Subset)?;
            let psi = self.tope()?;
            self.expect(TokenKind::Comma)?;
            let chi = self.tope()?;
            self.expect(TokenKind::Subset)?;
            let zeta = self.tope()?;
            self.expect(TokenKind::RParen)?;
            return Ok(pushout_formula(phi, psi, chi, zeta));
        }
        if let TokenKind::Ident(x) = self.peek().clone() {
            if self.resolve(&x).is_none() {
                if let Some(shape) = self.shapes.get(&x).cloned() {
                    let span = self.span();
                    self.bump();
                    let point = self.cube_point()?;
                    if point.len() != shape.arity() {
                        return self.fail(
                            span,
                            format!("shape `{x}` expects {} coordinates, got {}", shape.arity(), point.len()),
                        );
                    }
                    return Ok(instantiate_cubes_tope(&shape.tope, &point));
                }
            }
        }
        let lhs = self.cube_term()?;
        if self.eat(&TokenKind::EqEq) {
            Ok(Tope::Eq(lhs, self.cube_term()?))
        } else if self.eat(&TokenKind::Leq) {
            Ok(Tope::Leq(lhs, self.cube_term()?))
        } else {
            self.error(&["`===`", "`<=`"])
        }
    }
}

fn fold_pi(binders: &[Binder], body: RcExpr) -> RcExpr {
    binders.iter().rev().fold(body, |b, binder| match binder {
        Binder::Term(n, a) => Expr::pi(n.clone(), a.clone(), b),
        Binder::Cube(shape) => Expr::ext(shape.clone(), b, None),
    })
}

fn fold_lam(binders: &[Binder], body: RcExpr) -> RcExpr {
    binders.iter().rev().fold(body, |b, binder| match binder {
        Binder::Term(n, _) => Expr::lam(n.clone(), b),
        Binder::Cube(shape) => Expr::ext_lam(shape.vars.clone(), b),
    })
}
