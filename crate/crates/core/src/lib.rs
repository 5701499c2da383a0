//! Kernel, tope solver, type checker and surface syntax for a simplicial
//! type theory with shapes and strict extension types.

pub mod checker;
pub mod context;
pub mod corpus;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod solver;
pub mod subst;
pub mod syntax;

pub use context::Context;
pub use solver::Solver;
pub use syntax::{CubeTerm, Expr, RcExpr, Shape, Tope};
