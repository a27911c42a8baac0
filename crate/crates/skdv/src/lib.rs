//! Numerical laboratory for the coupled Schrodinger-KdV system posed on
//! right and left half-lines.
//!
//! The crate is organised around the constructive solution machinery for the
//! initial-boundary value problem: spectral grids and discrete Sobolev norms
//! (`grid`), Riemann-Liouville fractional integration (`fracint`), the free
//! Schrodinger/Airy groups and Duhamel integrals (`propagators`), the boundary
//! forcing operator families (`forcing`), Bourgain-norm estimators with a
//! Monte-Carlo inequality harness (`bourgain`), and the Picard fixed-point
//! solver (`solver`).

pub mod bourgain;
pub mod error;
pub mod forcing;
pub mod fracint;
pub mod grid;
pub mod par;
pub mod profiles;
pub mod propagators;
pub mod solver;

pub use error::Error;
pub use grid::{Side, SpaceTimeGrid};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
