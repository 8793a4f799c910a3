//! Numerical experiments on additive twists Σ λ(1,n) e(α n^β) V(n/X) of GL(3)
//! Hecke coefficients, together with checks of the analytic ingredients used
//! to bound them: the delta symbol, GL(3) Voronoi summation, Kloosterman-type
//! character sums, stationary phase and exponent bookkeeping.

pub mod arith;
pub mod coefficients;
pub mod delta;
pub mod error;
pub mod exponents;
pub mod expsums;
pub mod numeric;
pub mod oscillatory;
pub mod twist;
pub mod voronoi;

pub use error::{Error, Result};
