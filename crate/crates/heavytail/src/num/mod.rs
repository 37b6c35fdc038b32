//! Shared numerical routines: quadrature, bracketing root finders,
//! standard normal functions, and a small dense-LP solver.

pub mod gauss;
pub mod quad;
pub mod roots;
pub mod simplex;
