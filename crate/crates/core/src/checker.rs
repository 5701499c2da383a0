//! Bidirectional type checking and tope-sensitive definitional equality.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::context::Context;
use crate::parser::{Decl, DeclKind, ShapeTable};
use crate::printer::{print_tope, Printer};
use crate::solver::Solver;
use crate::subst::{
    alpha_eq, instantiate, instantiate_cubes, instantiate_cubes_tope, shift_cubes, shift_terms,
};
use crate::syntax::{CubeTerm, Expr, ExtType, JElim, RcExpr, Shape, Tope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Mismatch,
    NotAFunction,
    BoundaryViolation,
    TopeFalse,
    UnboundName,
    UniverseError,
    Redefinition,
    ParseError,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Mismatch,
        Category::NotAFunction,
        Category::BoundaryViolation,
        Category::TopeFalse,
        Category::UnboundName,
        Category::UniverseError,
        Category::Redefinition,
        Category::ParseError,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Mismatch => "Mismatch",
            Category::NotAFunction => "NotAFunction",
            Category::BoundaryViolation => "BoundaryViolation",
            Category::TopeFalse => "TopeFalse",
            Category::UnboundName => "UnboundName",
            Category::UniverseError => "UniverseError",
            Category::Redefinition => "Redefinition",
            Category::ParseError => "ParseError",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The judgement `Ξ | φ ⊢ a ≡ b` that failed a boundary check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequent {
    pub cube: Vec<String>,
    pub tope: String,
    pub lhs: String,
    pub rhs: String,
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) | {} |- {} === {}", self.cube.join(", "), self.tope, self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{category}: {message}")]
pub struct TypeError {
    pub category: Category,
    pub message: String,
    pub sequent: Option<Box<Sequent>>,
}

impl TypeError {
    pub fn new(category: Category, message: impl Into<String>) -> TypeError {
        TypeError { category, message: message.into(), sequent: None }
    }
}

type TResult<T> = Result<T, TypeError>;

#[derive(Debug, Clone)]
pub struct Entry {
    pub ty: RcExpr,
    pub value: Option<RcExpr>,
}

/// Checked top-level declarations, in order.
#[derive(Debug, Clone, Default)]
pub struct Env {
    entries: IndexMap<String, Entry>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn insert(&mut self, name: String, entry: Entry) {
        self.entries.insert(name, entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Entry)> {
        self.entries.iter()
    }

    /// Named shapes, for the parser.
    pub fn shapes(&self) -> ShapeTable {
        self.entries
            .iter()
            .filter_map(|(n, e)| match e.value.as_deref() {
                Some(Expr::ShapeType(s)) => Some((n.clone(), s.clone())),
                _ => None,
            })
            .collect()
    }
}

pub struct Checker {
    pub env: Env,
    pub solver: Arc<Solver>,
}

fn cube_point(k: usize) -> Vec<CubeTerm> {
    (0..k).rev().map(CubeTerm::Var).collect()
}

impl Checker {
    pub fn new(env: Env, solver: Arc<Solver>) -> Checker {
        Checker { env, solver }
    }

    pub fn show(&self, ctx: &Context, e: &Expr) -> String {
        Printer::in_scope(&ctx.names(), &ctx.cube).expr(e)
    }

    fn show_tope(&self, ctx: &Context, t: &Tope) -> String {
        print_tope(t, &ctx.cube)
    }

    // ----- evaluation ----------------------------------------------------

    /// Weak head normal form.
    pub fn whnf(&self, ctx: &Context, e: &RcExpr) -> RcExpr {
        let mut e = e.clone();
        loop {
            let next = match &*e {
                Expr::Var(i) => ctx.definiens(*i),
                Expr::Global(n) => self.env.get(n).and_then(|x| x.value.clone()),
                Expr::Ann(a, _) => Some(a.clone()),
                Expr::App(f, a) => {
                    let f2 = self.whnf(ctx, f);
                    match &*f2 {
                        Expr::Lam(_, b) => Some(instantiate(b, a)),
                        _ => return Expr::app(f2, a.clone()),
                    }
                }
                Expr::Fst(p) => {
                    let p2 = self.whnf(ctx, p);
                    match &*p2 {
                        Expr::Pair(a, _) => Some(a.clone()),
                        _ => return Expr::fst(p2),
                    }
                }
                Expr::Snd(p) => {
                    let p2 = self.whnf(ctx, p);
                    match &*p2 {
                        Expr::Pair(_, b) => Some(b.clone()),
                        _ => return Expr::snd(p2),
                    }
                }
                Expr::J(j) => {
                    let path = self.whnf(ctx, &j.path);
                    match &*path {
                        Expr::Refl(_) => Some(j.base.clone()),
                        _ => return Expr::J(Box::new(JElim { path, ..(**j).clone() })).rc(),
                    }
                }
                Expr::CubeApp(f, point) => {
                    let f2 = self.whnf(ctx, f);
                    match &*f2 {
                        Expr::ExtLam(ns, b) if ns.len() == point.len() => Some(instantiate_cubes(b, point)),
                        _ => match self.boundary_value(ctx, &f2, point) {
                            Some(v) => Some(v),
                            None => return Expr::cube_app(f2, point.clone()),
                        },
                    }
                }
                Expr::RecOr(branches) => branches
                    .iter()
                    .find(|(phi, _)| self.solver.entails(&ctx.tope, phi))
                    .map(|(_, a)| a.clone()),
                _ => None,
            };
            match next {
                Some(n) => e = n,
                None => return e,
            }
        }
    }

    /// For a neutral `f` of extension type, its boundary value at `point`
    /// when the point lies on the boundary.
    fn boundary_value(&self, ctx: &Context, f: &RcExpr, point: &[CubeTerm]) -> Option<RcExpr> {
        let ty = self.infer(ctx, f).ok()?;
        let ty = self.whnf(ctx, &ty);
        let Expr::Ext(x) = &*ty else { return None };
        let b = x.boundary.as_ref()?;
        if x.shape.arity() != point.len() {
            return None;
        }
        let phi = instantiate_cubes_tope(&b.tope, point);
        self.solver.entails(&ctx.tope, &phi).then(|| instantiate_cubes(&b.term, point))
    }

    // ----- conversion ----------------------------------------------------

    /// Definitional equality of `a` and `b` at type `ty`, decided separately
    /// on every satisfiable disjunct of the tope context.
    pub fn convertible(&self, ctx: &Context, a: &RcExpr, b: &RcExpr, ty: &RcExpr) -> bool {
        self.failing_leaf(ctx, a, b, ty).is_none()
    }

    /// The first disjunct of the tope context on which `a ≢ b`, if any.
    fn failing_leaf(&self, ctx: &Context, a: &RcExpr, b: &RcExpr, ty: &RcExpr) -> Option<Context> {
        if alpha_eq(a, b) {
            return None;
        }
        let leaves = self.solver.leaves(&ctx.tope);
        match leaves.as_slice() {
            [only] if *only == ctx.tope => (!self.conv_leaf(ctx, a, b, ty)).then(|| ctx.clone()),
            _ => leaves
                .into_iter()
                .map(|leaf| ctx.with_tope(leaf))
                .find(|leaf| !self.conv_leaf(leaf, a, b, ty)),
        }
    }

    pub fn convertible_types(&self, ctx: &Context, a: &RcExpr, b: &RcExpr) -> bool {
        self.convertible(ctx, a, b, &Expr::universe())
    }

    fn conv_leaf(&self, ctx: &Context, a: &RcExpr, b: &RcExpr, ty: &RcExpr) -> bool {
        let ty = self.whnf(ctx, ty);
        match &*ty {
            Expr::Pi(n, dom, cod) => {
                let ctx2 = ctx.push_var(n.clone(), dom.clone());
                let a2 = Expr::app(shift_terms(a, 1, 0), Expr::var(0));
                let b2 = Expr::app(shift_terms(b, 1, 0), Expr::var(0));
                self.convertible(&ctx2, &a2, &b2, cod)
            }
            Expr::Sigma(_, fst_ty, snd_ty) => {
                let (a1, b1) = (Expr::fst(a.clone()), Expr::fst(b.clone()));
                self.convertible(ctx, &a1, &b1, fst_ty)
                    && self.convertible(
                        ctx,
                        &Expr::snd(a.clone()),
                        &Expr::snd(b.clone()),
                        &instantiate(snd_ty, &a1),
                    )
            }
            Expr::Unit => true,
            Expr::Ext(x) => {
                let k = x.shape.arity();
                let ctx2 = ctx.with_cubes(&x.shape.vars, x.shape.tope.clone());
                let a2 = Expr::cube_app(shift_cubes(a, k, 0), cube_point(k));
                let b2 = Expr::cube_app(shift_cubes(b, k, 0), cube_point(k));
                self.convertible(&ctx2, &a2, &b2, &x.family)
            }
            _ => {
                let (a, b) = (self.whnf(ctx, a), self.whnf(ctx, b));
                self.conv_whnf(ctx, &a, &b, &ty)
            }
        }
    }

    fn conv_whnf(&self, ctx: &Context, a: &RcExpr, b: &RcExpr, ty: &RcExpr) -> bool {
        if alpha_eq(a, b) {
            return true;
        }
        match (&**a, &**b) {
            (Expr::RecOr(bs), _) => {
                return bs.iter().all(|(phi, x)| self.convertible(&ctx.assume(phi.clone()), x, b, ty))
            }
            (_, Expr::RecOr(bs)) => {
                return bs.iter().all(|(phi, y)| self.convertible(&ctx.assume(phi.clone()), a, y, ty))
            }
            _ => {}
        }
        match (&**a, &**b) {
            (Expr::Universe, Expr::Universe)
            | (Expr::ShapeSort, Expr::ShapeSort)
            | (Expr::Unit, Expr::Unit)
            | (Expr::Tt, Expr::Tt) => true,
            (Expr::Pi(n, a1, b1), Expr::Pi(_, a2, b2)) | (Expr::Sigma(n, a1, b1), Expr::Sigma(_, a2, b2)) => {
                std::mem::discriminant(&**a) == std::mem::discriminant(&**b)
                    && self.convertible_types(ctx, a1, a2)
                    && self.convertible_types(&ctx.push_var(n.clone(), a1.clone()), b1, b2)
            }
            (Expr::Id(t1, x1, y1), Expr::Id(t2, x2, y2)) => {
                self.convertible_types(ctx, t1, t2)
                    && self.convertible(ctx, x1, x2, t1)
                    && self.convertible(ctx, y1, y2, t1)
            }
            (Expr::Ext(x1), Expr::Ext(x2)) => self.conv_ext(ctx, x1, x2),
            (Expr::ShapeType(s1), Expr::ShapeType(s2)) => self.same_shape(ctx, s1, s2),
            (Expr::Refl(x1), Expr::Refl(x2)) => match self.infer(ctx, x1) {
                Ok(t) => self.convertible(ctx, x1, x2, &t),
                Err(_) => false,
            },
            _ => self.conv_neutral(ctx, a, b).is_some(),
        }
    }

    fn same_shape(&self, ctx: &Context, s1: &Shape, s2: &Shape) -> bool {
        let k = s1.arity();
        if k != s2.arity() {
            return false;
        }
        let amb = ctx.tope.shift(k, 0);
        self.solver.entails(&Tope::meet(amb.clone(), s1.tope.clone()), &s2.tope)
            && self.solver.entails(&Tope::meet(amb, s2.tope.clone()), &s1.tope)
    }

    fn conv_ext(&self, ctx: &Context, x1: &ExtType, x2: &ExtType) -> bool {
        if !self.same_shape(ctx, &x1.shape, &x2.shape) {
            return false;
        }
        let ctx2 = ctx.with_cubes(&x1.shape.vars, x1.shape.tope.clone());
        if !self.convertible_types(&ctx2, &x1.family, &x2.family) {
            return false;
        }
        let (phi1, phi2) = (x1.boundary_tope(), x2.boundary_tope());
        if !(self.solver.entails(&Tope::meet(ctx2.tope.clone(), phi1.clone()), &phi2)
            && self.solver.entails(&Tope::meet(ctx2.tope.clone(), phi2), &phi1))
        {
            return false;
        }
        match (&x1.boundary, &x2.boundary) {
            (Some(b1), Some(b2)) => self.convertible(&ctx2.assume(b1.tope.clone()), &b1.term, &b2.term, &x1.family),
            // the other boundary tope is unsatisfiable here
            _ => true,
        }
    }

    /// Compare two neutral spines; on success return their common type.
    fn conv_neutral(&self, ctx: &Context, a: &RcExpr, b: &RcExpr) -> Option<RcExpr> {
        match (&**a, &**b) {
            (Expr::Var(i), Expr::Var(j)) if i == j => ctx.lookup(*i),
            (Expr::Global(m), Expr::Global(n)) if m == n => self.env.get(m).map(|e| e.ty.clone()),
            (Expr::App(f1, a1), Expr::App(f2, a2)) => {
                let t = self.conv_neutral(ctx, f1, f2)?;
                match &*self.whnf(ctx, &t) {
                    Expr::Pi(_, dom, cod) => {
                        self.convertible(ctx, a1, a2, dom).then(|| instantiate(cod, a1))
                    }
                    _ => None,
                }
            }
            (Expr::CubeApp(f1, p1), Expr::CubeApp(f2, p2)) => {
                if p1.len() != p2.len() {
                    return None;
                }
                let same_point = p1
                    .iter()
                    .zip(p2)
                    .all(|(x, y)| x == y || self.solver.entails(&ctx.tope, &Tope::Eq(*x, *y)));
                if !same_point {
                    return None;
                }
                let t = self.conv_neutral(ctx, f1, f2)?;
                match &*self.whnf(ctx, &t) {
                    Expr::Ext(x) if x.shape.arity() == p1.len() => Some(instantiate_cubes(&x.family, p1)),
                    _ => None,
                }
            }
            (Expr::Fst(p1), Expr::Fst(p2)) => {
                let t = self.conv_neutral(ctx, p1, p2)?;
                match &*self.whnf(ctx, &t) {
                    Expr::Sigma(_, a, _) => Some(a.clone()),
                    _ => None,
                }
            }
            (Expr::Snd(p1), Expr::Snd(p2)) => {
                let t = self.conv_neutral(ctx, p1, p2)?;
                match &*self.whnf(ctx, &t) {
                    Expr::Sigma(_, _, b) => Some(instantiate(b, &Expr::fst(p1.clone()))),
                    _ => None,
                }
            }
            (Expr::J(j1), Expr::J(j2)) => {
                let ok = self.convertible_types(ctx, &j1.ty, &j2.ty)
                    && self.convertible(ctx, &j1.from, &j2.from, &j1.ty)
                    && self.convertible(ctx, &j1.motive, &j2.motive, &self.motive_type(&j1.ty, &j1.from))
                    && self.convertible(ctx, &j1.to, &j2.to, &j1.ty)
                    && self.conv_neutral(ctx, &j1.path, &j2.path).is_some()
                    && self.convertible(
                        ctx,
                        &j1.base,
                        &j2.base,
                        &Expr::apps(j1.motive.clone(), [j1.from.clone(), Expr::refl(j1.from.clone())]),
                    );
                ok.then(|| Expr::apps(j1.motive.clone(), [j1.to.clone(), j1.path.clone()]))
            }
            _ => None,
        }
    }

    /// `(y : A) -> Id A a y -> U`
    fn motive_type(&self, ty: &RcExpr, from: &RcExpr) -> RcExpr {
        Expr::pi(
            "y",
            ty.clone(),
            Expr::pi(
                "p",
                Expr::id(shift_terms(ty, 1, 0), shift_terms(from, 1, 0), Expr::var(0)),
                Expr::universe(),
            ),
        )
    }

    // ----- typing --------------------------------------------------------

    /// `T` is a type: it lives in the universe or is a shape.
    pub fn check_type(&self, ctx: &Context, t: &RcExpr) -> TResult<()> {
        if !self.solver.satisfiable(&ctx.tope) {
            return Ok(());
        }
        let sort = self.infer(ctx, t)?;
        match &*self.whnf(ctx, &sort) {
            Expr::Universe | Expr::ShapeSort => Ok(()),
            _ => Err(TypeError::new(
                Category::UniverseError,
                format!("`{}` is not a type (it has type `{}`)", self.show(ctx, t), self.show(ctx, &sort)),
            )),
        }
    }

    pub fn infer(&self, ctx: &Context, e: &RcExpr) -> TResult<RcExpr> {
        match &**e {
            Expr::Var(i) => ctx
                .lookup(*i)
                .ok_or_else(|| TypeError::new(Category::UnboundName, format!("variable #{i} out of scope"))),
            Expr::Global(n) => self
                .env
                .get(n)
                .map(|x| x.ty.clone())
                .ok_or_else(|| TypeError::new(Category::UnboundName, format!("unbound name `{n}`"))),
            Expr::Universe | Expr::ShapeSort => Ok(Expr::universe()),
            Expr::ShapeType(s) => {
                self.check_shape(ctx, s)?;
                Ok(Expr::ShapeSort.rc())
            }
            Expr::Unit => Ok(Expr::universe()),
            Expr::Tt => Ok(Expr::Unit.rc()),
            Expr::Pi(n, a, b) | Expr::Sigma(n, a, b) => {
                self.check_type(ctx, a)?;
                self.check_type(&ctx.push_var(n.clone(), a.clone()), b)?;
                Ok(Expr::universe())
            }
            Expr::Id(t, x, y) => {
                self.check_type(ctx, t)?;
                self.check(ctx, x, t)?;
                self.check(ctx, y, t)?;
                Ok(Expr::universe())
            }
            Expr::Ext(x) => {
                self.check_ext_formation(ctx, x)?;
                Ok(Expr::universe())
            }
            Expr::App(f, a) => {
                // a redex with an unannotated function behaves like `let`
                if let Expr::Lam(n, body) = &**f {
                    let ta = self.infer(ctx, a)?;
                    let tb = self.infer(&ctx.push_var(n.clone(), ta), body)?;
                    return Ok(instantiate(&tb, a));
                }
                let tf = self.infer(ctx, f)?;
                let tf = self.whnf(ctx, &tf);
                match &*tf {
                    Expr::Pi(_, dom, cod) => {
                        self.check(ctx, a, dom)?;
                        Ok(instantiate(cod, a))
                    }
                    Expr::Ext(_) => Err(TypeError::new(
                        Category::NotAFunction,
                        format!(
                            "`{}` has an extension type and must be applied to a cube point, not to `{}`",
                            self.show(ctx, f),
                            self.show(ctx, a)
                        ),
                    )),
                    _ => Err(TypeError::new(
                        Category::NotAFunction,
                        format!("`{}` of type `{}` is not a function", self.show(ctx, f), self.show(ctx, &tf)),
                    )),
                }
            }
            Expr::CubeApp(f, point) => {
                let tf = self.infer(ctx, f)?;
                let tf = self.whnf(ctx, &tf);
                let Expr::Ext(x) = &*tf else {
                    return Err(TypeError::new(
                        Category::NotAFunction,
                        format!(
                            "`{}` of type `{}` cannot be applied to a cube point",
                            self.show(ctx, f),
                            self.show(ctx, &tf)
                        ),
                    ));
                };
                if x.shape.arity() != point.len() {
                    return Err(TypeError::new(
                        Category::Mismatch,
                        format!(
                            "`{}` expects a point with {} coordinates, got {}",
                            self.show(ctx, f),
                            x.shape.arity(),
                            point.len()
                        ),
                    ));
                }
                let member = instantiate_cubes_tope(&x.shape.tope, point);
                if !self.solver.entails(&ctx.tope, &member) {
                    return Err(TypeError::new(
                        Category::TopeFalse,
                        format!(
                            "point of `{}` is not in its shape: {} does not entail {}",
                            self.show(ctx, e),
                            self.show_tope(ctx, &ctx.tope),
                            self.show_tope(ctx, &member)
                        ),
                    ));
                }
                Ok(instantiate_cubes(&x.family, point))
            }
            Expr::Pair(a, b) => {
                let ta = self.infer(ctx, a)?;
                let tb = self.infer(ctx, b)?;
                Ok(Expr::sigma("", ta, shift_terms(&tb, 1, 0)))
            }
            Expr::Fst(p) | Expr::Snd(p) => {
                let tp = self.infer(ctx, p)?;
                match &*self.whnf(ctx, &tp) {
                    Expr::Sigma(_, a, b) => Ok(match &**e {
                        Expr::Fst(_) => a.clone(),
                        _ => instantiate(b, &Expr::fst(p.clone())),
                    }),
                    _ => Err(TypeError::new(
                        Category::Mismatch,
                        format!("`{}` of type `{}` is not a pair", self.show(ctx, p), self.show(ctx, &tp)),
                    )),
                }
            }
            Expr::Refl(x) => {
                let t = self.infer(ctx, x)?;
                Ok(Expr::id(t, x.clone(), x.clone()))
            }
            Expr::J(j) => {
                self.check_type(ctx, &j.ty)?;
                self.check(ctx, &j.from, &j.ty)?;
                self.check(ctx, &j.motive, &self.motive_type(&j.ty, &j.from))?;
                let base_ty = Expr::apps(j.motive.clone(), [j.from.clone(), Expr::refl(j.from.clone())]);
                self.check(ctx, &j.base, &base_ty)?;
                self.check(ctx, &j.to, &j.ty)?;
                self.check(ctx, &j.path, &Expr::id(j.ty.clone(), j.from.clone(), j.to.clone()))?;
                Ok(Expr::apps(j.motive.clone(), [j.to.clone(), j.path.clone()]))
            }
            Expr::Ann(a, t) => {
                self.check_type(ctx, t)?;
                self.check(ctx, a, t)?;
                Ok(t.clone())
            }
            Expr::Lam(..) | Expr::ExtLam(..) | Expr::RecOr(_) => Err(TypeError::new(
                Category::Mismatch,
                format!("cannot infer a type for `{}`; add an annotation", self.show(ctx, e)),
            )),
        }
    }

    fn check_shape(&self, ctx: &Context, s: &Shape) -> TResult<()> {
        if s.tope.is_scoped(ctx.cube.len() + s.arity()) {
            Ok(())
        } else {
            Err(TypeError::new(Category::UnboundName, "shape mentions an unbound cube variable"))
        }
    }

    /// Formation of `ext ψ -> A [ φ |-> a ]`.
    pub fn check_ext_formation(&self, ctx: &Context, x: &ExtType) -> TResult<()> {
        self.check_shape(ctx, &x.shape)?;
        let k = x.shape.arity();
        let ctx2 = ctx.with_cubes(&x.shape.vars, x.shape.tope.clone());
        if let Some(b) = &x.boundary {
            let hyp = Tope::meet(ctx.tope.shift(k, 0), b.tope.clone());
            if !self.solver.entails(&hyp, &x.shape.tope) {
                return Err(TypeError::new(
                    Category::TopeFalse,
                    format!(
                        "boundary {} is not contained in the shape {}",
                        self.show_tope(&ctx2, &b.tope),
                        self.show_tope(&ctx2, &x.shape.tope)
                    ),
                ));
            }
        }
        self.check_type(&ctx2, &x.family)?;
        if let Some(b) = &x.boundary {
            self.check(&ctx2.assume(b.tope.clone()), &b.term, &x.family)?;
        }
        Ok(())
    }

    pub fn check(&self, ctx: &Context, e: &RcExpr, ty: &RcExpr) -> TResult<()> {
        if !self.solver.satisfiable(&ctx.tope) {
            return Ok(());
        }
        let whnf_ty = self.whnf(ctx, ty);
        match (&**e, &*whnf_ty) {
            (Expr::Lam(n, body), Expr::Pi(_, dom, cod)) => {
                self.check(&ctx.push_var(n.clone(), dom.clone()), body, cod)
            }
            (Expr::Lam(..), _) => Err(TypeError::new(
                Category::Mismatch,
                format!("a function was given where `{}` was expected", self.show(ctx, ty)),
            )),
            (Expr::ExtLam(names, body), Expr::Ext(x)) => {
                if names.len() != x.shape.arity() {
                    return Err(TypeError::new(
                        Category::Mismatch,
                        format!("abstraction binds {} cube variables, shape has {}", names.len(), x.shape.arity()),
                    ));
                }
                let ctx2 = ctx.with_cubes(names, x.shape.tope.clone());
                self.check(&ctx2, body, &x.family)?;
                if let Some(b) = &x.boundary {
                    let ctx3 = ctx2.assume(b.tope.clone());
                    if let Some(leaf) = self.failing_leaf(&ctx3, body, &b.term, &x.family) {
                        return Err(self.boundary_violation(&leaf, body, &b.term));
                    }
                }
                Ok(())
            }
            (Expr::ExtLam(..), _) => Err(TypeError::new(
                Category::Mismatch,
                format!("a shape abstraction was given where `{}` was expected", self.show(ctx, ty)),
            )),
            (Expr::Pair(a, b), Expr::Sigma(_, ta, tb)) => {
                self.check(ctx, a, ta)?;
                self.check(ctx, b, &instantiate(tb, a))
            }
            (Expr::RecOr(branches), _) => {
                let cover = Tope::disj(branches.iter().map(|(phi, _)| phi.clone()));
                if !self.solver.entails(&ctx.tope, &cover) {
                    return Err(TypeError::new(
                        Category::TopeFalse,
                        format!(
                            "case split does not cover the context: {} does not entail {}",
                            self.show_tope(ctx, &ctx.tope),
                            self.show_tope(ctx, &cover)
                        ),
                    ));
                }
                for (phi, a) in branches {
                    self.check(&ctx.assume(phi.clone()), a, ty)?;
                }
                for (i, (phi, a)) in branches.iter().enumerate() {
                    for (chi, b) in &branches[i + 1..] {
                        let overlap = ctx.assume(Tope::and(phi.clone(), chi.clone()));
                        if let Some(leaf) = self.failing_leaf(&overlap, a, b, ty) {
                            return Err(self.boundary_violation(&leaf, a, b));
                        }
                    }
                }
                Ok(())
            }
            _ => {
                let inferred = self.infer(ctx, e)?;
                if self.convertible_types(ctx, &inferred, ty) {
                    Ok(())
                } else {
                    Err(TypeError::new(
                        Category::Mismatch,
                        format!(
                            "`{}` has type `{}` but `{}` was expected",
                            self.show(ctx, e),
                            self.show(ctx, &inferred),
                            self.show(ctx, ty)
                        ),
                    ))
                }
            }
        }
    }

    fn boundary_violation(&self, ctx: &Context, a: &RcExpr, b: &RcExpr) -> TypeError {
        let sequent = Sequent {
            cube: ctx.cube.clone(),
            tope: self.show_tope(ctx, &ctx.tope),
            lhs: self.show(ctx, &self.whnf(ctx, a)),
            rhs: self.show(ctx, &self.whnf(ctx, b)),
        };
        TypeError {
            category: Category::BoundaryViolation,
            message: format!("boundary does not agree: {sequent}"),
            sequent: Some(Box::new(sequent)),
        }
    }

    // ----- declarations --------------------------------------------------

    /// Check one declaration, extending the environment. Returns the lines
    /// a directive reports.
    pub fn check_decl(&mut self, decl: &Decl) -> TResult<Vec<String>> {
        let ctx = Context::new();
        match &decl.kind {
            DeclKind::Def { name, ty, value } => {
                self.fresh_name(name)?;
                self.check_type(&ctx, ty)?;
                self.check(&ctx, value, ty)?;
                self.env.insert(name.clone(), Entry { ty: ty.clone(), value: Some(value.clone()) });
                Ok(vec![])
            }
            DeclKind::Postulate { name, ty } => {
                self.fresh_name(name)?;
                self.check_type(&ctx, ty)?;
                self.env.insert(name.clone(), Entry { ty: ty.clone(), value: None });
                Ok(vec![])
            }
            DeclKind::Check { expr, ty } => {
                let ty = match ty {
                    Some(t) => {
                        self.check_type(&ctx, t)?;
                        self.check(&ctx, expr, t)?;
                        t.clone()
                    }
                    None => self.infer(&ctx, expr)?,
                };
                Ok(vec![format!("{} : {}", self.show(&ctx, expr), self.show(&ctx, &ty))])
            }
            DeclKind::Normalize { expr, expected } => {
                self.infer(&ctx, expr)?;
                let nf = self.whnf(&ctx, expr);
                if let Some(want) = expected {
                    let want_nf = self.whnf(&ctx, want);
                    if !alpha_eq(&nf, want) && !alpha_eq(&nf, &want_nf) {
                        return Err(TypeError::new(
                            Category::Mismatch,
                            format!(
                                "`{}` normalizes to `{}`, not `{}`",
                                self.show(&ctx, expr),
                                self.show(&ctx, &nf),
                                self.show(&ctx, want)
                            ),
                        ));
                    }
                }
                Ok(vec![format!("{} ~> {}", self.show(&ctx, expr), self.show(&ctx, &nf))])
            }
            DeclKind::Entails { hyp, goal, text, .. } => {
                if self.solver.entails(hyp, goal) {
                    Ok(vec![format!("VALID {text}")])
                } else {
                    Err(TypeError::new(Category::TopeFalse, format!("sequent does not hold: {text}")))
                }
            }
            DeclKind::Import(_) => Ok(vec![]),
        }
    }

    fn fresh_name(&self, name: &str) -> TResult<()> {
        if self.env.contains(name) {
            Err(TypeError::new(Category::Redefinition, format!("`{name}` is already defined")))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Boundary;
    use CubeTerm::{One, Var, Zero};

    fn checker() -> Checker {
        Checker::new(Env::new(), Arc::new(Solver::default()))
    }

    fn d1() -> Shape {
        Shape::new(vec!["t".into()], Tope::Top)
    }

    fn d1_boundary() -> Tope {
        Tope::or(Tope::Eq(Var(0), Zero), Tope::Eq(Var(0), One))
    }

    /// `ext (t : Δ¹) -> B [∂Δ¹ |-> recBD t x y]` for terms scoped outside.
    fn hom(b: RcExpr, x: RcExpr, y: RcExpr) -> RcExpr {
        Expr::ext(
            d1(),
            b,
            Some(Boundary { tope: d1_boundary(), term: Expr::rec_bd(Var(0), x, y) }),
        )
    }

    /// B : U, x : B, y : B
    fn base() -> Context {
        Context::new()
            .push_var("B", Expr::universe())
            .push_var("x", Expr::var(0))
            .push_var("y", Expr::var(1))
    }

    #[test]
    fn beta() {
        let c = checker();
        let e = Expr::app(Expr::lam("x", Expr::var(0)), Expr::global("b"));
        assert!(alpha_eq(&c.whnf(&Context::new(), &e), &Expr::global("b")));
    }

    #[test]
    fn hom_formation_and_strict_endpoint() {
        let c = checker();
        let ctx = base();
        let ty = hom(Expr::var(2), Expr::var(1), Expr::var(0));
        c.check_type(&ctx, &ty).unwrap();
        let ctx = ctx.push_var("f", ty);
        let f0 = Expr::cube_app(Expr::var(0), vec![Zero]);
        assert!(alpha_eq(&c.whnf(&ctx, &f0), &Expr::var(2)));
        let f1 = Expr::cube_app(Expr::var(0), vec![One]);
        assert!(alpha_eq(&c.whnf(&ctx, &f1), &Expr::var(1)));
        let t = c.infer(&ctx, &f0).unwrap();
        assert!(alpha_eq(&t, &Expr::var(3)));
    }

    #[test]
    fn neutral_boundary_under_tope() {
        // t | t === 0 ⊢ f t ≡ x
        let c = checker();
        let ctx = base().push_var("f", hom(Expr::var(2), Expr::var(1), Expr::var(0)));
        let ctx = ctx.with_cubes(&["t".into()], Tope::Eq(Var(0), Zero));
        let ft = Expr::cube_app(Expr::var(0), vec![Var(0)]);
        assert!(c.convertible(&ctx, &ft, &Expr::var(2), &Expr::var(3)));
        let ctx_top = ctx.with_tope(Tope::Top);
        assert!(!c.convertible(&ctx_top, &ft, &Expr::var(2), &Expr::var(3)));
    }

    #[test]
    fn identity_arrow_checks() {
        let c = checker();
        let ctx = Context::new().push_var("B", Expr::universe()).push_var("b", Expr::var(0));
        let ty = hom(Expr::var(1), Expr::var(0), Expr::var(0));
        let id = Expr::ext_lam(vec!["t".into()], Expr::var(0));
        c.check(&ctx, &id, &ty).unwrap();
    }

    #[test]
    fn constant_arrow_violates_boundary() {
        let c = checker();
        let ctx = base();
        let ty = hom(Expr::var(2), Expr::var(1), Expr::var(0));
        let bad = Expr::ext_lam(vec!["t".into()], Expr::var(0));
        let err = c.check(&ctx, &bad, &ty).unwrap_err();
        assert_eq!(err.category, Category::BoundaryViolation);
        let seq = err.sequent.unwrap();
        assert_eq!(seq.tope, "t === 0");
        assert_eq!((seq.lhs.as_str(), seq.rhs.as_str()), ("y", "x"));
    }

    #[test]
    fn eta_for_extensions() {
        let c = checker();
        let ctx = base().push_var("f", hom(Expr::var(2), Expr::var(1), Expr::var(0)));
        let ty = ctx.lookup(0).unwrap();
        let eta = Expr::ext_lam(vec!["t".into()], Expr::cube_app(Expr::var(0), vec![Var(0)]));
        assert!(c.convertible(&ctx, &Expr::var(0), &eta, &ty));
    }

    #[test]
    fn vacuous_context_equates() {
        let c = checker();
        let ctx = base().with_cubes(&["t".into()], Tope::Bot);
        assert!(c.convertible(&ctx, &Expr::var(0), &Expr::var(1), &Expr::var(2)));
        c.check(&ctx, &Expr::var(0), &Expr::Unit.rc()).unwrap();
    }

    #[test]
    fn refl_and_pairs() {
        let c = checker();
        let ctx = base();
        let t = c.infer(&ctx, &Expr::refl(Expr::var(1))).unwrap();
        assert!(alpha_eq(&t, &Expr::id(Expr::var(2), Expr::var(1), Expr::var(1))));
        let p = Expr::pair(Expr::var(1), Expr::var(0));
        assert!(alpha_eq(&c.infer(&ctx, &Expr::fst(p.clone())).unwrap(), &Expr::var(2)));
        c.check(&ctx, &p, &Expr::sigma("", Expr::var(2), Expr::var(3))).unwrap();
    }

    #[test]
    fn j_computes_on_refl() {
        let c = checker();
        let j = Expr::J(Box::new(JElim {
            ty: Expr::global("A"),
            from: Expr::global("a"),
            motive: Expr::global("C"),
            base: Expr::global("d"),
            to: Expr::global("a"),
            path: Expr::refl(Expr::global("a")),
        }))
        .rc();
        assert!(alpha_eq(&c.whnf(&Context::new(), &j), &Expr::global("d")));
    }

    #[test]
    fn application_outside_shape() {
        // f : ext {(t, s) | s <= t} -> B ; f <0, 1> is outside Δ²
        let c = checker();
        let d2 = Shape::new(vec!["t".into(), "s".into()], Tope::Leq(Var(0), Var(1)));
        let ctx = Context::new().push_var("B", Expr::universe()).push_var("f", Expr::ext(d2, Expr::var(0), None));
        let err = c.infer(&ctx, &Expr::cube_app(Expr::var(0), vec![Zero, One])).unwrap_err();
        assert_eq!(err.category, Category::TopeFalse);
        c.infer(&ctx, &Expr::cube_app(Expr::var(0), vec![One, Zero])).unwrap();
    }

    #[test]
    fn universe_misuse() {
        let c = checker();
        let err = c.check_type(&Context::new(), &Expr::Tt.rc()).unwrap_err();
        assert_eq!(err.category, Category::UniverseError);
    }
}
