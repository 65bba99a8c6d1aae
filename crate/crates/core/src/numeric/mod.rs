//! Exact rational arithmetic and linear programming.

pub mod lp;
mod rational;

pub use lp::{lp_feasible, Constraint, LinearProgram, LpSolution, LpStatus, Rel, Sense};
pub use rational::{r, rat, Rational};
