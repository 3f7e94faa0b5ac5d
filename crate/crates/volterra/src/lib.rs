//! Nonlinear Volterra integral equations of the second kind,
//!
//! ```text
//!     x(t) = integral_0^t G(t, s) f(s, x(s)) ds + g(t),    t in [0, 1],
//! ```
//!
//! solved by piecewise-linear collocation on uniform meshes and by Legendre
//! spectral collocation, together with a toolkit for integral Holder spaces:
//! moduli of continuity, the `j_{alpha,beta}` seminorm, sup-norm and
//! interpolation-error bounds, and a checker for the existence condition of
//! the underlying fixed-point argument.

pub mod error;
pub mod expr;
pub mod harness;
pub mod holder;
pub mod interp;
pub mod problem;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
