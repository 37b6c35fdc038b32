//! Computational toolkit for concentration of measure with heavy-tailed
//! product laws.
//!
//! The crate is organized around five mathematical modules and a harness:
//!
//! * [`dist`] — scalar laws, quantile functions, local Lipschitz constants
//!   of the quantile map, and the coordinatewise Gaussian transport map.
//! * [`tailcmp`] — tail and quantile comparison under convex majorization:
//!   optimal hinge witnesses, conditional tail bounds, quantile envelopes,
//!   the coarsening counterexample, and regularity condition checks.
//! * [`ostats`] — order-statistic envelopes (exact `ξ`-function form and a
//!   Rényi-representation form), trimmed-sum bounds, and the power /
//!   power-log integral estimates they rest on.
//! * [`lornorm`] — the interpolation norm generated by normalized sign
//!   vectors, its dual, sandwich approximations, and a Poisson-process
//!   norm estimator.
//! * [`conc`] — the deviation bound formulas themselves (Weibull-tail and
//!   power-tail regimes), a Pisier-inequality Monte Carlo check, and
//!   published comparison bounds.
//! * [`harness`] — seeded Monte Carlo engine, empirical survival curves,
//!   constant fitting, the constant registry, and report emission.

pub mod conc;
pub mod dist;
pub mod error;
pub mod harness;
pub mod lornorm;
pub mod num;
pub mod ostats;
pub mod tailcmp;

pub use error::{Error, Result};
