//! Equilibria of competitive pooling markets.
//!
//! A library for computing, certifying, or refuting Nash equilibria among
//! players that each solve a nonconvex (mixed-integer) pooling problem. The
//! stack is self-contained: a bounded-variable simplex, a McCormick-based
//! spatial branch-and-bound for bilinear models, pooling model builders, and
//! the cutting-plane minimum-disequilibrium loop with its heuristics.

pub mod equilibrium;
pub mod games;
pub mod global;
pub mod io;
pub mod lp;
pub mod pooling;
pub mod qcqp;
pub mod rng;

pub use qcqp::{
    BilinearTerm, Constraint, Direction, LinearExpr, QcqpError, QcqpModel, QuadExpr, Sense, VarId,
    VarKind, Variable,
};
