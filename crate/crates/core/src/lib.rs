//! Perov-type fixed-point machinery for hybrid operator equations
//! `x = Ax . Bx + Cx` on spaces normed by vectors of `R^n_+`, together with a
//! coupled system of quadratic fractional integral equations built on it.
//!
//! Layers, bottom up:
//!
//! - [`matrix`]: nonnegative matrices, spectral radius, `(I - M)^{-1}`.
//! - [`grid`]: grid functions and the vector norm of the product space.
//! - [`fractional`]: gamma function and Riemann-Liouville integrals.
//! - [`perov`]: fixed-point iteration with matrix Lipschitz certificates.
//! - [`hybrid`]: inner/outer solvers for `x = Ax . By + Cx`.
//! - [`hypothesis`]: the checkable conditions on a coupled system.
//! - [`example`]: the built-in worked system.
//! - [`cli`]: command-line front end.

pub mod cli;
pub mod error;
pub mod example;
pub mod fractional;
pub mod grid;
pub mod hybrid;
pub mod hypothesis;
pub mod matrix;
pub mod perov;

pub use error::{Error, Result};
pub use fractional::{gamma, rl_integral, FracOrder, RlWeights};
pub use grid::{Grid, GridFunction, PairFunction};
pub use matrix::{NonnegMatrix, OrderedVector};
