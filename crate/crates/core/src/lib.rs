//! Expected density of level crossings for random sums of entire functions
//! with Gaussian coefficients, with numerical integration and Monte Carlo
//! zero counting to check it.

// `!(x > t)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod density;
pub mod model;
pub mod numeric;
pub mod quadrature;
pub mod rng;
pub mod zerocount;
