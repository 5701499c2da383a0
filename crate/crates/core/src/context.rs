//! Typing contexts: cube variables, the current tope constraint and typed
//! term variables with optional definientia.

use crate::subst::weaken;
use crate::syntax::{RcExpr, Tope};

#[derive(Debug, Clone)]
pub struct Binding {
    pub name: String,
    pub ty: RcExpr,
    pub value: Option<RcExpr>,
    /// Length of the cube context when the binding was introduced; `ty` and
    /// `value` are scoped there.
    pub cube_len: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Context {
    /// Cube variable names, outermost first (the last one is index 0).
    pub cube: Vec<String>,
    /// Conjunction of every tope assumed so far.
    pub tope: Tope,
    /// Term variables, outermost first.
    pub vars: Vec<Binding>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn push_var(&self, name: impl Into<String>, ty: RcExpr) -> Context {
        self.push(name.into(), ty, None)
    }

    pub fn push_def(&self, name: impl Into<String>, ty: RcExpr, value: RcExpr) -> Context {
        self.push(name.into(), ty, Some(value))
    }

    fn push(&self, name: String, ty: RcExpr, value: Option<RcExpr>) -> Context {
        let mut next = self.clone();
        next.vars.push(Binding { name, ty, value, cube_len: self.cube.len() });
        next
    }

    /// Bind fresh cube variables (outermost first) and assume `psi`, which
    /// is scoped over the extended cube context.
    pub fn with_cubes(&self, names: &[String], psi: Tope) -> Context {
        let mut next = self.clone();
        next.cube.extend(names.iter().cloned());
        next.tope = Tope::meet(self.tope.shift(names.len(), 0), psi);
        next
    }

    /// Additionally assume `phi` (scoped over the current cube context).
    pub fn assume(&self, phi: Tope) -> Context {
        let mut next = self.clone();
        next.tope = Tope::meet(self.tope.clone(), phi);
        next
    }

    /// Replace the tope constraint.
    pub fn with_tope(&self, phi: Tope) -> Context {
        let mut next = self.clone();
        next.tope = phi;
        next
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    fn binding(&self, idx: usize) -> Option<(&Binding, usize, usize)> {
        let pos = self.vars.len().checked_sub(idx + 1)?;
        let b = &self.vars[pos];
        Some((b, idx + 1, self.cube.len() - b.cube_len))
    }

    /// Type of term variable `idx`, weakened into the current context.
    pub fn lookup(&self, idx: usize) -> Option<RcExpr> {
        self.binding(idx).map(|(b, dt, dc)| weaken(&b.ty, dt, dc))
    }

    /// Definiens of term variable `idx`, if any, weakened likewise.
    pub fn definiens(&self, idx: usize) -> Option<RcExpr> {
        let (b, dt, dc) = self.binding(idx)?;
        b.value.as_ref().map(|v| weaken(v, dt, dc))
    }

    pub fn var_name(&self, idx: usize) -> Option<&str> {
        self.binding(idx).map(|(b, _, _)| b.name.as_str())
    }

    /// Term variable names, outermost first.
    pub fn names(&self) -> Vec<String> {
        self.vars.iter().map(|b| b.name.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subst::alpha_eq;
    use crate::syntax::{CubeTerm, Expr};

    #[test]
    fn lookup_weakens_types() {
        // A : U, x : A  ⊢  x : Var 1
        let ctx = Context::new().push_var("A", Expr::universe()).push_var("x", Expr::var(0));
        assert!(alpha_eq(&ctx.lookup(0).unwrap(), &Expr::var(1)));
        assert!(alpha_eq(&ctx.lookup(1).unwrap(), &Expr::universe()));
        assert!(ctx.lookup(2).is_none());
    }

    #[test]
    fn lookup_weakens_past_cube_binders() {
        let f_ty = Expr::cube_app(Expr::var(0), vec![CubeTerm::Var(0)]);
        let ctx = Context::new()
            .with_cubes(&["t".into()], Tope::Top)
            .push_var("f", f_ty)
            .with_cubes(&["s".into()], Tope::Leq(CubeTerm::Var(0), CubeTerm::Var(1)));
        let got = ctx.lookup(0).unwrap();
        let want = Expr::cube_app(Expr::var(1), vec![CubeTerm::Var(1)]);
        assert!(alpha_eq(&got, &want));
    }

    #[test]
    fn tope_shifts_under_new_cubes() {
        let ctx = Context::new()
            .with_cubes(&["t".into()], Tope::Eq(CubeTerm::Var(0), CubeTerm::Zero))
            .with_cubes(&["s".into()], Tope::Top);
        assert_eq!(ctx.tope, Tope::Eq(CubeTerm::Var(1), CubeTerm::Zero));
    }
}
