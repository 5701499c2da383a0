//! Core syntax: cube terms, topes, shapes and expressions.
//!
//! Every binder is nameless. Term variables and cube variables live in two
//! separate de Bruijn index spaces: `Expr::Var(0)` is the innermost term
//! binder and `CubeTerm::Var(0)` the innermost cube binder. The `String`s
//! carried by binders are only hints for the printer and are ignored by
//! [`alpha_eq`](crate::subst::alpha_eq).

use std::sync::Arc;

/// A point of the directed interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CubeTerm {
    Var(usize),
    Zero,
    One,
}

impl CubeTerm {
    pub fn shift(self, by: usize, cutoff: usize) -> CubeTerm {
        match self {
            CubeTerm::Var(i) if i >= cutoff => CubeTerm::Var(i + by),
            other => other,
        }
    }
}

/// Formulas of the tope layer. There is no negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum Tope {
    #[default]
    Top,
    Bot,
    And(Box<Tope>, Box<Tope>),
    Or(Box<Tope>, Box<Tope>),
    Eq(CubeTerm, CubeTerm),
    Leq(CubeTerm, CubeTerm),
}

impl Tope {
    pub fn and(a: Tope, b: Tope) -> Tope {
        Tope::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Tope, b: Tope) -> Tope {
        Tope::Or(Box::new(a), Box::new(b))
    }

    /// Right-nested conjunction; the empty conjunction is `Top`.
    pub fn conj(topes: impl IntoIterator<Item = Tope>) -> Tope {
        let mut items: Vec<Tope> = topes.into_iter().collect();
        match items.pop() {
            None => Tope::Top,
            Some(last) => items.into_iter().rev().fold(last, |acc, t| Tope::and(t, acc)),
        }
    }

    /// Right-nested disjunction; the empty disjunction is `Bot`.
    pub fn disj(topes: impl IntoIterator<Item = Tope>) -> Tope {
        let mut items: Vec<Tope> = topes.into_iter().collect();
        match items.pop() {
            None => Tope::Bot,
            Some(last) => items.into_iter().rev().fold(last, |acc, t| Tope::or(t, acc)),
        }
    }

    /// Conjunction that drops a trivial `Top` operand.
    pub fn meet(a: Tope, b: Tope) -> Tope {
        match (a, b) {
            (Tope::Top, t) | (t, Tope::Top) => t,
            (a, b) => Tope::and(a, b),
        }
    }

    pub fn map_cubes(&self, f: &mut impl FnMut(CubeTerm) -> CubeTerm) -> Tope {
        match self {
            Tope::Top => Tope::Top,
            Tope::Bot => Tope::Bot,
            Tope::And(a, b) => Tope::and(a.map_cubes(f), b.map_cubes(f)),
            Tope::Or(a, b) => Tope::or(a.map_cubes(f), b.map_cubes(f)),
            Tope::Eq(x, y) => Tope::Eq(f(*x), f(*y)),
            Tope::Leq(x, y) => Tope::Leq(f(*x), f(*y)),
        }
    }

    pub fn shift(&self, by: usize, cutoff: usize) -> Tope {
        if by == 0 {
            return self.clone();
        }
        self.map_cubes(&mut |c| c.shift(by, cutoff))
    }

    pub fn for_each_cube(&self, f: &mut impl FnMut(CubeTerm)) {
        match self {
            Tope::Top | Tope::Bot => {}
            Tope::And(a, b) | Tope::Or(a, b) => {
                a.for_each_cube(f);
                b.for_each_cube(f);
            }
            Tope::Eq(x, y) | Tope::Leq(x, y) => {
                f(*x);
                f(*y);
            }
        }
    }

    pub fn mentions_var(&self, idx: usize) -> bool {
        let mut found = false;
        self.for_each_cube(&mut |c| found |= c == CubeTerm::Var(idx));
        found
    }

    /// True when every variable index is below `depth`.
    pub fn is_scoped(&self, depth: usize) -> bool {
        let mut ok = true;
        self.for_each_cube(&mut |c| {
            if let CubeTerm::Var(i) = c {
                ok &= i < depth;
            }
        });
        ok
    }

    /// Truth value of a variable-free tope, if it holds in every bounded
    /// total order (with or without distinct endpoints).
    pub fn eval_closed(&self) -> Option<bool> {
        fn rank(c: CubeTerm) -> Option<u8> {
            match c {
                CubeTerm::Zero => Some(0),
                CubeTerm::One => Some(1),
                CubeTerm::Var(_) => None,
            }
        }
        match self {
            Tope::Top => Some(true),
            Tope::Bot => Some(false),
            Tope::And(a, b) => match (a.eval_closed(), b.eval_closed()) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Tope::Or(a, b) => match (a.eval_closed(), b.eval_closed()) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            Tope::Eq(x, y) => {
                let (x, y) = (rank(*x)?, rank(*y)?);
                // 0 === 1 is only refuted under distinct endpoints
                if x == y {
                    Some(true)
                } else {
                    None
                }
            }
            Tope::Leq(x, y) => {
                let (x, y) = (rank(*x)?, rank(*y)?);
                if x <= y {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }
}

/// A cube context together with a tope carving out a subshape.
///
/// The tope is scoped over the ambient cube context extended by `vars`
/// (the last entry of `vars` is cube index 0). Named shapes are closed.
#[derive(Debug, Clone)]
pub struct Shape {
    pub vars: Vec<String>,
    pub tope: Tope,
}

impl Shape {
    pub fn new(vars: Vec<String>, tope: Tope) -> Shape {
        Shape { vars, tope }
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn renamed(&self, vars: Vec<String>) -> Shape {
        debug_assert_eq!(vars.len(), self.vars.len());
        Shape { vars, tope: self.tope.clone() }
    }

    /// Cartesian product; the variables of `self` come first.
    pub fn product(&self, other: &Shape) -> Shape {
        let (m, n) = (self.arity(), other.arity());
        let left = self.tope.shift(n, 0);
        let right = other.tope.shift(m, n);
        let mut vars = self.vars.clone();
        vars.extend(other.vars.iter().cloned());
        Shape { vars, tope: Tope::meet(left, right) }
    }
}

pub type RcExpr = Arc<Expr>;

/// The `[ φ |-> a ]` part of an extension type.
#[derive(Debug, Clone)]
pub struct Boundary {
    pub tope: Tope,
    pub term: RcExpr,
}

/// `ext ψ -> A [ φ |-> a ]`. `family`, the boundary tope and the partial
/// term are all scoped under the shape's cube variables.
#[derive(Debug, Clone)]
pub struct ExtType {
    pub shape: Shape,
    pub family: RcExpr,
    pub boundary: Option<Boundary>,
}

impl ExtType {
    /// The boundary tope, `Bot` when there is none.
    pub fn boundary_tope(&self) -> Tope {
        self.boundary.as_ref().map_or(Tope::Bot, |b| b.tope.clone())
    }
}

/// Based path induction: `J A a C d b p : C b p`.
#[derive(Debug, Clone)]
pub struct JElim {
    pub ty: RcExpr,
    pub from: RcExpr,
    pub motive: RcExpr,
    pub base: RcExpr,
    pub to: RcExpr,
    pub path: RcExpr,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Var(usize),
    Global(String),
    Universe,
    /// The sort of shapes; `ShapeType` values live here.
    ShapeSort,
    Pi(String, RcExpr, RcExpr),
    Lam(String, RcExpr),
    App(RcExpr, RcExpr),
    Sigma(String, RcExpr, RcExpr),
    Pair(RcExpr, RcExpr),
    Fst(RcExpr),
    Snd(RcExpr),
    Id(RcExpr, RcExpr, RcExpr),
    Refl(RcExpr),
    J(Box<JElim>),
    Unit,
    Tt,
    Ext(Box<ExtType>),
    ExtLam(Vec<String>, RcExpr),
    /// Application of an extension-typed term to a cube point.
    CubeApp(RcExpr, Vec<CubeTerm>),
    ShapeType(Shape),
    /// Tope-directed case split `recOR (φ |-> a | χ |-> b | ...)`.
    RecOr(Vec<(Tope, RcExpr)>),
    Ann(RcExpr, RcExpr),
}

impl Expr {
    pub fn rc(self) -> RcExpr {
        Arc::new(self)
    }

    pub fn var(i: usize) -> RcExpr {
        Expr::Var(i).rc()
    }

    pub fn global(name: impl Into<String>) -> RcExpr {
        Expr::Global(name.into()).rc()
    }

    pub fn universe() -> RcExpr {
        Expr::Universe.rc()
    }

    pub fn pi(name: impl Into<String>, dom: RcExpr, cod: RcExpr) -> RcExpr {
        Expr::Pi(name.into(), dom, cod).rc()
    }

    pub fn lam(name: impl Into<String>, body: RcExpr) -> RcExpr {
        Expr::Lam(name.into(), body).rc()
    }

    pub fn app(f: RcExpr, a: RcExpr) -> RcExpr {
        Expr::App(f, a).rc()
    }

    pub fn apps(f: RcExpr, args: impl IntoIterator<Item = RcExpr>) -> RcExpr {
        args.into_iter().fold(f, Expr::app)
    }

    pub fn sigma(name: impl Into<String>, fst: RcExpr, snd: RcExpr) -> RcExpr {
        Expr::Sigma(name.into(), fst, snd).rc()
    }

    pub fn pair(a: RcExpr, b: RcExpr) -> RcExpr {
        Expr::Pair(a, b).rc()
    }

    pub fn fst(p: RcExpr) -> RcExpr {
        Expr::Fst(p).rc()
    }

    pub fn snd(p: RcExpr) -> RcExpr {
        Expr::Snd(p).rc()
    }

    pub fn id(ty: RcExpr, lhs: RcExpr, rhs: RcExpr) -> RcExpr {
        Expr::Id(ty, lhs, rhs).rc()
    }

    pub fn refl(tm: RcExpr) -> RcExpr {
        Expr::Refl(tm).rc()
    }

    pub fn ext(shape: Shape, family: RcExpr, boundary: Option<Boundary>) -> RcExpr {
        Expr::Ext(Box::new(ExtType { shape, family, boundary })).rc()
    }

    pub fn ext_lam(names: Vec<String>, body: RcExpr) -> RcExpr {
        Expr::ExtLam(names, body).rc()
    }

    pub fn cube_app(f: RcExpr, point: Vec<CubeTerm>) -> RcExpr {
        Expr::CubeApp(f, point).rc()
    }

    pub fn rec_or(branches: Vec<(Tope, RcExpr)>) -> RcExpr {
        Expr::RecOr(branches).rc()
    }

    /// `recBD t a b`: `a` on `t === 0`, `b` on `t === 1`.
    pub fn rec_bd(t: CubeTerm, a: RcExpr, b: RcExpr) -> RcExpr {
        Expr::rec_or(vec![
            (Tope::Eq(t, CubeTerm::Zero), a),
            (Tope::Eq(t, CubeTerm::One), b),
        ])
    }
}
