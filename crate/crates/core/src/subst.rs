//! Shifting, capture-free substitution and alpha-equivalence.

use std::sync::Arc;

use crate::syntax::{Boundary, CubeTerm, Expr, ExtType, JElim, RcExpr, Shape, Tope};

/// One pass over an expression. `term` is consulted at every term variable
/// with the current (term, cube) binder depth; returning `None` keeps the
/// variable. `cube` rewrites every cube term.
struct Mapper<F, G> {
    term: F,
    cube: G,
    /// Resolve a `recOR` whose branch tope became closed and true.
    resolve_closed: bool,
}

impl<F, G> Mapper<F, G>
where
    F: FnMut(usize, usize, usize) -> Option<RcExpr>,
    G: FnMut(CubeTerm, usize) -> CubeTerm,
{
    fn tope(&mut self, t: &Tope, cd: usize) -> Tope {
        let cube = &mut self.cube;
        t.map_cubes(&mut |c| cube(c, cd))
    }

    fn shape(&mut self, s: &Shape, cd: usize) -> Shape {
        Shape { vars: s.vars.clone(), tope: self.tope(&s.tope, cd + s.arity()) }
    }

    fn go(&mut self, e: &RcExpr, td: usize, cd: usize) -> RcExpr {
        match &**e {
            Expr::Var(i) => (self.term)(*i, td, cd).unwrap_or_else(|| e.clone()),
            Expr::Global(_) | Expr::Universe | Expr::ShapeSort | Expr::Unit | Expr::Tt => e.clone(),
            Expr::Pi(n, a, b) => Expr::Pi(n.clone(), self.go(a, td, cd), self.go(b, td + 1, cd)).rc(),
            Expr::Lam(n, b) => Expr::Lam(n.clone(), self.go(b, td + 1, cd)).rc(),
            Expr::App(f, a) => Expr::App(self.go(f, td, cd), self.go(a, td, cd)).rc(),
            Expr::Sigma(n, a, b) => {
                Expr::Sigma(n.clone(), self.go(a, td, cd), self.go(b, td + 1, cd)).rc()
            }
            Expr::Pair(a, b) => Expr::Pair(self.go(a, td, cd), self.go(b, td, cd)).rc(),
            Expr::Fst(p) => Expr::Fst(self.go(p, td, cd)).rc(),
            Expr::Snd(p) => Expr::Snd(self.go(p, td, cd)).rc(),
            Expr::Id(a, x, y) => {
                Expr::Id(self.go(a, td, cd), self.go(x, td, cd), self.go(y, td, cd)).rc()
            }
            Expr::Refl(x) => Expr::Refl(self.go(x, td, cd)).rc(),
            Expr::J(j) => Expr::J(Box::new(JElim {
                ty: self.go(&j.ty, td, cd),
                from: self.go(&j.from, td, cd),
                motive: self.go(&j.motive, td, cd),
                base: self.go(&j.base, td, cd),
                to: self.go(&j.to, td, cd),
                path: self.go(&j.path, td, cd),
            }))
            .rc(),
            Expr::Ext(x) => {
                let k = x.shape.arity();
                let shape = self.shape(&x.shape, cd);
                let family = self.go(&x.family, td, cd + k);
                let boundary = x.boundary.as_ref().map(|b| Boundary {
                    tope: self.tope(&b.tope, cd + k),
                    term: self.go(&b.term, td, cd + k),
                });
                Expr::Ext(Box::new(ExtType { shape, family, boundary })).rc()
            }
            Expr::ExtLam(ns, b) => Expr::ExtLam(ns.clone(), self.go(b, td, cd + ns.len())).rc(),
            Expr::CubeApp(f, pt) => {
                let f = self.go(f, td, cd);
                let pt = pt.iter().map(|c| (self.cube)(*c, cd)).collect();
                Expr::CubeApp(f, pt).rc()
            }
            Expr::ShapeType(s) => Expr::ShapeType(self.shape(s, cd)).rc(),
            Expr::RecOr(branches) => {
                let mut out = Vec::with_capacity(branches.len());
                for (phi, a) in branches {
                    let phi2 = self.tope(phi, cd);
                    let a2 = self.go(a, td, cd);
                    if self.resolve_closed && phi2 != *phi && phi2.eval_closed() == Some(true) {
                        return a2;
                    }
                    out.push((phi2, a2));
                }
                Expr::RecOr(out).rc()
            }
            Expr::Ann(a, t) => Expr::Ann(self.go(a, td, cd), self.go(t, td, cd)).rc(),
        }
    }
}

fn run<F, G>(e: &RcExpr, term: F, cube: G, resolve_closed: bool) -> RcExpr
where
    F: FnMut(usize, usize, usize) -> Option<RcExpr>,
    G: FnMut(CubeTerm, usize) -> CubeTerm,
{
    Mapper { term, cube, resolve_closed }.go(e, 0, 0)
}

/// Add `by` to every term variable at or above `cutoff`.
pub fn shift_terms(e: &RcExpr, by: usize, cutoff: usize) -> RcExpr {
    if by == 0 {
        return e.clone();
    }
    run(
        e,
        |i, td, _| (i >= cutoff + td).then(|| Expr::var(i + by)),
        |c, _| c,
        false,
    )
}

/// Add `by` to every cube variable at or above `cutoff`.
pub fn shift_cubes(e: &RcExpr, by: usize, cutoff: usize) -> RcExpr {
    if by == 0 {
        return e.clone();
    }
    run(e, |_, _, _| None, |c, cd| c.shift(by, cutoff + cd), false)
}

/// Weaken `e` under `terms` term binders and `cubes` cube binders.
pub fn weaken(e: &RcExpr, terms: usize, cubes: usize) -> RcExpr {
    shift_terms(&shift_cubes(e, cubes, 0), terms, 0)
}

/// Replace term variable `idx` by `r`, both scoped in the same context.
/// No binder is removed, so every other index is unchanged.
pub fn subst_var(e: &RcExpr, idx: usize, r: &RcExpr) -> RcExpr {
    run(
        e,
        |i, td, cd| (i == idx + td).then(|| weaken(r, td, cd)),
        |c, _| c,
        false,
    )
}

/// Beta-instantiate the innermost term binder of `body` with `arg`.
/// `arg` lives in the scope outside the binder.
pub fn instantiate(body: &RcExpr, arg: &RcExpr) -> RcExpr {
    run(
        body,
        |i, td, cd| {
            if i == td {
                Some(weaken(arg, td, cd))
            } else if i > td {
                Some(Expr::var(i - 1))
            } else {
                None
            }
        },
        |c, _| c,
        false,
    )
}

fn subst_cube_term(c: CubeTerm, idx: usize, t: CubeTerm, cd: usize) -> CubeTerm {
    match c {
        CubeTerm::Var(i) if i == idx + cd => t.shift(cd, 0),
        other => other,
    }
}

/// Replace cube variable `idx` by `t` in an expression. A `recOR` branch
/// whose tope becomes closed and valid resolves to that branch.
pub fn subst_cube(e: &RcExpr, idx: usize, t: CubeTerm) -> RcExpr {
    run(e, |_, _, _| None, |c, cd| subst_cube_term(c, idx, t, cd), true)
}

/// Replace cube variable `idx` by `t` in a tope.
pub fn subst_cube_tope(phi: &Tope, idx: usize, t: CubeTerm) -> Tope {
    phi.map_cubes(&mut |c| subst_cube_term(c, idx, t, 0))
}

fn instantiate_cube_term(c: CubeTerm, point: &[CubeTerm], cd: usize) -> CubeTerm {
    let k = point.len();
    match c {
        CubeTerm::Var(i) if i < cd => c,
        CubeTerm::Var(i) if i - cd < k => point[k - 1 - (i - cd)].shift(cd, 0),
        CubeTerm::Var(i) => CubeTerm::Var(i - k),
        other => other,
    }
}

/// Instantiate the innermost `point.len()` cube binders with `point`
/// (first component for the outermost of them).
pub fn instantiate_cubes(e: &RcExpr, point: &[CubeTerm]) -> RcExpr {
    if point.is_empty() {
        return e.clone();
    }
    run(e, |_, _, _| None, |c, cd| instantiate_cube_term(c, point, cd), true)
}

pub fn instantiate_cubes_tope(phi: &Tope, point: &[CubeTerm]) -> Tope {
    phi.map_cubes(&mut |c| instantiate_cube_term(c, point, 0))
}

/// Does term variable `idx` occur free in `e`?
pub fn occurs_var(e: &RcExpr, idx: usize) -> bool {
    let mut found = false;
    run(
        e,
        |i, td, _| {
            found |= i == idx + td;
            None
        },
        |c, _| c,
        false,
    );
    found
}

/// Does cube variable `idx` occur free in `e`?
pub fn occurs_cube(e: &RcExpr, idx: usize) -> bool {
    let mut found = false;
    run(
        e,
        |_, _, _| None,
        |c, cd| {
            found |= c == CubeTerm::Var(idx + cd);
            c
        },
        false,
    );
    found
}

/// Structural equality under positional binding; binder name hints are
/// ignored.
pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    use Expr::*;
    match (a, b) {
        (Var(i), Var(j)) => i == j,
        (Global(x), Global(y)) => x == y,
        (Universe, Universe) | (ShapeSort, ShapeSort) | (Unit, Unit) | (Tt, Tt) => true,
        (Pi(_, a1, b1), Pi(_, a2, b2))
        | (Sigma(_, a1, b1), Sigma(_, a2, b2))
        | (App(a1, b1), App(a2, b2))
        | (Pair(a1, b1), Pair(a2, b2))
        | (Ann(a1, b1), Ann(a2, b2)) => alpha_eq(a1, a2) && alpha_eq(b1, b2),
        (Lam(_, b1), Lam(_, b2)) | (Fst(b1), Fst(b2)) | (Snd(b1), Snd(b2)) | (Refl(b1), Refl(b2)) => {
            alpha_eq(b1, b2)
        }
        (Id(a1, x1, y1), Id(a2, x2, y2)) => alpha_eq(a1, a2) && alpha_eq(x1, x2) && alpha_eq(y1, y2),
        (J(j1), J(j2)) => {
            alpha_eq(&j1.ty, &j2.ty)
                && alpha_eq(&j1.from, &j2.from)
                && alpha_eq(&j1.motive, &j2.motive)
                && alpha_eq(&j1.base, &j2.base)
                && alpha_eq(&j1.to, &j2.to)
                && alpha_eq(&j1.path, &j2.path)
        }
        (Ext(x1), Ext(x2)) => {
            shape_eq(&x1.shape, &x2.shape)
                && alpha_eq(&x1.family, &x2.family)
                && match (&x1.boundary, &x2.boundary) {
                    (None, None) => true,
                    (Some(b1), Some(b2)) => b1.tope == b2.tope && alpha_eq(&b1.term, &b2.term),
                    _ => false,
                }
        }
        (ExtLam(n1, b1), ExtLam(n2, b2)) => n1.len() == n2.len() && alpha_eq(b1, b2),
        (CubeApp(f1, p1), CubeApp(f2, p2)) => p1 == p2 && alpha_eq(f1, f2),
        (ShapeType(s1), ShapeType(s2)) => shape_eq(s1, s2),
        (RecOr(bs1), RecOr(bs2)) => {
            bs1.len() == bs2.len()
                && bs1.iter().zip(bs2).all(|((p1, a1), (p2, a2))| p1 == p2 && alpha_eq(a1, a2))
        }
        _ => false,
    }
}

pub fn shape_eq(a: &Shape, b: &Shape) -> bool {
    a.arity() == b.arity() && a.tope == b.tope
}

/// Pointer-or-structural equality shortcut.
pub fn same(a: &RcExpr, b: &RcExpr) -> bool {
    Arc::ptr_eq(a, b) || alpha_eq(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::CubeTerm::*;

    fn b() -> RcExpr {
        Expr::global("b")
    }

    #[test]
    fn subst_identity_on_target() {
        assert!(alpha_eq(&subst_var(&Expr::var(0), 0, &b()), &b()));
    }

    #[test]
    fn subst_shifts_under_binder() {
        // (\ Var1 Var0)[0 := Var 3]  ->  \ Var4 Var0
        let e = Expr::lam("x", Expr::app(Expr::var(1), Expr::var(0)));
        let got = subst_var(&e, 0, &Expr::var(3));
        let want = Expr::lam("x", Expr::app(Expr::var(4), Expr::var(0)));
        assert!(alpha_eq(&got, &want));
    }

    #[test]
    fn instantiate_removes_binder() {
        // body = Var1 Var0 under one binder; instantiate with Var 5
        let body = Expr::app(Expr::var(1), Expr::var(0));
        let got = instantiate(&body, &Expr::var(5));
        assert!(alpha_eq(&got, &Expr::app(Expr::var(0), Expr::var(5))));
    }

    #[test]
    fn cube_subst_rewrites_atoms() {
        let phi = Tope::Leq(Var(0), One);
        assert_eq!(subst_cube_tope(&phi, 0, Zero), Tope::Leq(Zero, One));
    }

    #[test]
    fn cube_subst_resolves_boundary_split() {
        let split = Expr::rec_bd(Var(0), Expr::global("x"), Expr::global("y"));
        let got = subst_cube(&split, 0, Zero);
        assert!(alpha_eq(&got, &Expr::global("x")));
        let got = subst_cube(&split, 0, One);
        assert!(alpha_eq(&got, &Expr::global("y")));
    }

    #[test]
    fn cube_instantiation_order() {
        // under (t, s): t is index 1, s is index 0
        let e = Expr::cube_app(Expr::global("f"), vec![Var(1), Var(0), Var(2)]);
        let got = instantiate_cubes(&e, &[Zero, One]);
        let want = Expr::cube_app(Expr::global("f"), vec![Zero, One, Var(0)]);
        assert!(alpha_eq(&got, &want));
    }

    #[test]
    fn alpha_ignores_names() {
        let a = Expr::lam("x", Expr::var(0));
        let b = Expr::lam("y", Expr::var(0));
        assert!(alpha_eq(&a, &b));
        let c = Expr::lam("x", Expr::app(Expr::lam("y", Expr::var(0)), Expr::var(0)));
        assert!(!alpha_eq(&a, &c));
    }
}
