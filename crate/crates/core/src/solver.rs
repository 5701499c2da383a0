//! Decision procedure for tope sequents over the strict interval, shape
//! inclusions and the pushout product, plus a brute-force chain oracle.
//!
//! A model is a bounded total order with bottom `0` and top `1`; with the
//! distinct-endpoints flag the order additionally has `0 < 1`.

use std::collections::HashMap;
use std::sync::Mutex;

use thiserror::Error;

use crate::syntax::{CubeTerm, Shape, Tope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    Eq(CubeTerm, CubeTerm),
    Leq(CubeTerm, CubeTerm),
    Bot,
}

impl Atom {
    pub fn to_tope(self) -> Tope {
        match self {
            Atom::Eq(x, y) => Tope::Eq(x, y),
            Atom::Leq(x, y) => Tope::Leq(x, y),
            Atom::Bot => Tope::Bot,
        }
    }
}

/// Disjunctive normal form: a list of conjunctions of atoms.
pub fn dnf(phi: &Tope) -> Vec<Vec<Atom>> {
    match phi {
        Tope::Top => vec![vec![]],
        Tope::Bot => vec![],
        Tope::Eq(x, y) => vec![vec![Atom::Eq(*x, *y)]],
        Tope::Leq(x, y) => vec![vec![Atom::Leq(*x, *y)]],
        Tope::Or(a, b) => {
            let mut out = dnf(a);
            out.extend(dnf(b));
            out
        }
        Tope::And(a, b) => {
            let (da, db) = (dnf(a), dnf(b));
            let mut out = Vec::with_capacity(da.len() * db.len());
            for ca in &da {
                for cb in &db {
                    let mut c = ca.clone();
                    c.extend(cb.iter().copied());
                    out.push(c);
                }
            }
            out
        }
    }
}

/// A saturated set of order facts over `0`, `1` and some cube variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Leaf {
    Inconsistent,
    Order(Preorder),
}

/// Reflexive-transitive `≤` relation; term 0 is `0`, term 1 is `1`, and
/// term `2 + k` is `Var(vars[k])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preorder {
    vars: Vec<usize>,
    le: Vec<Vec<bool>>,
}

impl Preorder {
    fn index(&self, c: CubeTerm) -> usize {
        match c {
            CubeTerm::Zero => 0,
            CubeTerm::One => 1,
            CubeTerm::Var(v) => {
                2 + self.vars.iter().position(|&w| w == v).expect("term registered in leaf")
            }
        }
    }

    fn size(&self) -> usize {
        self.le.len()
    }

    pub fn leq(&self, x: CubeTerm, y: CubeTerm) -> bool {
        self.le[self.index(x)][self.index(y)]
    }

    pub fn equal(&self, x: CubeTerm, y: CubeTerm) -> bool {
        self.leq(x, y) && self.leq(y, x)
    }

    /// Add `a ≤ b` and restore transitivity.
    fn add(&mut self, a: usize, b: usize) {
        if self.le[a][b] {
            return;
        }
        let n = self.size();
        let below: Vec<usize> = (0..n).filter(|&x| self.le[x][a]).collect();
        let above: Vec<usize> = (0..n).filter(|&y| self.le[b][y]).collect();
        for &x in &below {
            for &y in &above {
                self.le[x][y] = true;
            }
        }
    }

    /// First pair of terms the relation does not compare, if any.
    fn incomparable(&self) -> Option<(usize, usize)> {
        let n = self.size();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .find(|&(a, b)| !self.le[a][b] && !self.le[b][a])
    }

    /// Truth of `phi` in this (complete) preorder.
    fn eval(&self, phi: &Tope) -> bool {
        match phi {
            Tope::Top => true,
            Tope::Bot => false,
            Tope::And(a, b) => self.eval(a) && self.eval(b),
            Tope::Or(a, b) => self.eval(a) || self.eval(b),
            Tope::Eq(x, y) => self.equal(*x, *y),
            Tope::Leq(x, y) => self.leq(*x, *y),
        }
    }
}

fn collect_vars(atoms: &[Atom], extra: &[&Tope]) -> Vec<usize> {
    let mut vars = Vec::new();
    let mut note = |c: CubeTerm| {
        if let CubeTerm::Var(v) = c {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    };
    for a in atoms {
        match *a {
            Atom::Eq(x, y) | Atom::Leq(x, y) => {
                note(x);
                note(y);
            }
            Atom::Bot => {}
        }
    }
    for t in extra {
        t.for_each_cube(&mut note);
    }
    vars.sort_unstable();
    vars
}

fn saturate_over(atoms: &[Atom], vars: Vec<usize>, distinct: bool) -> Leaf {
    if atoms.contains(&Atom::Bot) {
        return Leaf::Inconsistent;
    }
    let n = 2 + vars.len();
    let mut le = vec![vec![false; n]; n];
    for (i, row) in le.iter_mut().enumerate() {
        row[i] = true;
        row[1] = true;
    }
    le[0].iter_mut().for_each(|b| *b = true);
    let mut p = Preorder { vars, le };
    for a in atoms {
        match *a {
            Atom::Leq(x, y) => {
                let (i, j) = (p.index(x), p.index(y));
                p.add(i, j);
            }
            Atom::Eq(x, y) => {
                let (i, j) = (p.index(x), p.index(y));
                p.add(i, j);
                p.add(j, i);
            }
            Atom::Bot => unreachable!(),
        }
    }
    if distinct && p.le[1][0] {
        Leaf::Inconsistent
    } else {
        Leaf::Order(p)
    }
}

/// Close a conjunction of atoms under the interval axioms.
pub fn saturate(atoms: &[Atom], distinct: bool) -> Leaf {
    saturate_over(atoms, collect_vars(atoms, &[]), distinct)
}

/// Every complete linear preorder extending `p`, each passed to `visit`;
/// stops early when `visit` returns false.
fn for_each_completion(p: Preorder, distinct: bool, visit: &mut impl FnMut(&Preorder) -> bool) -> bool {
    if distinct && p.le[1][0] {
        return true;
    }
    match p.incomparable() {
        None => visit(&p),
        Some((a, b)) => {
            let mut left = p.clone();
            left.add(a, b);
            if !for_each_completion(left, distinct, visit) {
                return false;
            }
            let mut right = p;
            right.add(b, a);
            for_each_completion(right, distinct, visit)
        }
    }
}

/// Does `hyp ⊢ goal` hold in every model? Uncached.
pub fn entails_with(hyp: &Tope, goal: &Tope, distinct: bool) -> bool {
    dnf(hyp).iter().all(|conj| {
        let vars = collect_vars(conj, &[goal]);
        match saturate_over(conj, vars, distinct) {
            Leaf::Inconsistent => true,
            Leaf::Order(p) => for_each_completion(p, distinct, &mut |leaf| leaf.eval(goal)),
        }
    })
}

pub fn satisfiable_with(phi: &Tope, distinct: bool) -> bool {
    !entails_with(phi, &Tope::Bot, distinct)
}

/// Entailment with a shared memo table.
#[derive(Debug)]
pub struct Solver {
    pub distinct_endpoints: bool,
    memo: Mutex<HashMap<(Tope, Tope), bool>>,
}

impl Default for Solver {
    fn default() -> Solver {
        Solver::new(true)
    }
}

impl Solver {
    pub fn new(distinct_endpoints: bool) -> Solver {
        Solver { distinct_endpoints, memo: Mutex::new(HashMap::new()) }
    }

    pub fn entails(&self, hyp: &Tope, goal: &Tope) -> bool {
        if matches!(goal, Tope::Top) || matches!(hyp, Tope::Bot) || hyp == goal {
            return true;
        }
        let key = (hyp.clone(), goal.clone());
        if let Some(&v) = self.memo.lock().expect("solver memo").get(&key) {
            return v;
        }
        let v = entails_with(hyp, goal, self.distinct_endpoints);
        self.memo.lock().expect("solver memo").insert(key, v);
        v
    }

    pub fn equivalent(&self, a: &Tope, b: &Tope) -> bool {
        self.entails(a, b) && self.entails(b, a)
    }

    pub fn satisfiable(&self, phi: &Tope) -> bool {
        !self.entails(phi, &Tope::Bot)
    }

    /// The satisfiable disjuncts of `phi`, each as a conjunction.
    pub fn leaves(&self, phi: &Tope) -> Vec<Tope> {
        dnf(phi)
            .into_iter()
            .filter(|c| !matches!(saturate(c, self.distinct_endpoints), Leaf::Inconsistent))
            .map(|c| Tope::conj(c.into_iter().map(Atom::to_tope)))
            .filter(|t| self.satisfiable(t))
            .collect()
    }

    pub fn memo_len(&self) -> usize {
        self.memo.lock().expect("solver memo").len()
    }
}

/// Brute-force semantics: try every assignment of `n_vars` variables into
/// chains of size `2..=max_chain` (and the one-point chain when endpoints
/// may coincide). True iff no assignment satisfies `hyp` but not `goal`.
pub fn oracle(n_vars: usize, hyp: &Tope, goal: &Tope, max_chain: usize, distinct: bool) -> bool {
    let min = if distinct { 2 } else { 1 };
    (min..=max_chain.max(min)).all(|size| {
        let mut point = vec![0usize; n_vars];
        loop {
            if holds(hyp, &point, size) && !holds(goal, &point, size) {
                return false;
            }
            // odometer
            let mut k = 0;
            loop {
                if k == n_vars {
                    return true;
                }
                point[k] += 1;
                if point[k] < size {
                    break;
                }
                point[k] = 0;
                k += 1;
            }
        }
    })
}

/// Evaluate `phi` at an assignment into the chain `0 < 1 < … < size-1`.
/// `point[i]` is the value of cube variable `Var(i)`.
pub fn holds(phi: &Tope, point: &[usize], size: usize) -> bool {
    let val = |c: &CubeTerm| match c {
        CubeTerm::Zero => 0,
        CubeTerm::One => size - 1,
        CubeTerm::Var(i) => point[*i],
    };
    match phi {
        Tope::Top => true,
        Tope::Bot => false,
        Tope::And(a, b) => holds(a, point, size) && holds(b, point, size),
        Tope::Or(a, b) => holds(a, point, size) || holds(b, point, size),
        Tope::Eq(x, y) => val(x) == val(y),
        Tope::Leq(x, y) => val(x) <= val(y),
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ShapeError {
    #[error("cube contexts differ: {0} vs {1} variables")]
    ContextMismatch(usize, usize),
    #[error("sub-tope is not included in the ambient tope")]
    NotIncluded,
}

/// `sub ⊆ sup` over a common cube context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeInclusion {
    vars: Vec<String>,
    sub: Tope,
    sup: Tope,
}

impl ShapeInclusion {
    pub fn new(vars: Vec<String>, sub: Tope, sup: Tope, solver: &Solver) -> Result<Self, ShapeError> {
        if solver.entails(&sub, &sup) {
            Ok(ShapeInclusion { vars, sub, sup })
        } else {
            Err(ShapeError::NotIncluded)
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn sub(&self) -> &Tope {
        &self.sub
    }

    pub fn sup(&self) -> &Tope {
        &self.sup
    }
}

/// `(φ ∧ ζ) ∨ (ψ ∧ χ)` for inclusions `φ ⊆ ψ` and `χ ⊆ ζ`.
pub fn pushout_formula(phi: Tope, psi: Tope, chi: Tope, zeta: Tope) -> Tope {
    Tope::or(Tope::and(phi, zeta), Tope::and(psi, chi))
}

/// Leibniz product `j ⊗̂ k` over the concatenated cube context, `j`'s
/// variables first. No simplification is performed.
pub fn pushout_product(j: &ShapeInclusion, k: &ShapeInclusion, solver: &Solver) -> ShapeInclusion {
    let n = k.vars.len();
    let (phi, psi) = (j.sub.shift(n, 0), j.sup.shift(n, 0));
    let (chi, zeta) = (k.sub.clone(), k.sup.clone());
    let sup = Tope::and(psi.clone(), zeta.clone());
    let sub = pushout_formula(phi, psi, chi, zeta);
    let mut vars = j.vars.clone();
    vars.extend(k.vars.iter().cloned());
    ShapeInclusion::new(vars, sub, sup, solver).expect("pushout product is an inclusion")
}

pub fn shape_included(sub: &Shape, sup: &Shape, solver: &Solver) -> Result<bool, ShapeError> {
    if sub.arity() != sup.arity() {
        return Err(ShapeError::ContextMismatch(sub.arity(), sup.arity()));
    }
    Ok(solver.entails(&sub.tope, &sup.tope))
}
