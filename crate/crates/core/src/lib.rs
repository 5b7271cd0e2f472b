//! Hadamard and eñe products of power series with isolated singularities.
//!
//! [`series`] computes truncated products, [`monodromy`] gives their exact
//! monodromy in `K[z^{±1}, log z]` and [`continuation`] measures the same
//! monodromy by contour integration with analytically continued integrands.

pub mod coeffs;
pub mod series;
pub mod logpoly;
pub mod monodromy;
pub mod continuation;
pub mod cli;
