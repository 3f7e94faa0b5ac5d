//! Collocation solvers for the integral equation.

pub mod linear;
pub mod spectral;
