//! Numerical toolkit for existential-closedness witnesses of the modular
//! `j`-function on products of upper half-planes.
//!
//! The crate locates points `(z, j(z))` on curves `P(z, w) = 0` (and on
//! transcendental graphs such as `w = exp(z)`) by translating a small
//! zero-containing ball toward a real boundary point with `SL2(Z)` and
//! certifying each translate with an argument-principle zero count.
//!
//! Modules:
//! - [`geometry`]: disk and polydisk geometry, Bergman metric, Shilov boundary.
//! - [`group`]: `SL2(Z)` actions, reduction, boundary-accumulating orbits, lattice search.
//! - [`modular`]: Eisenstein series, discriminant, `j`, `j'`, inversion of `j`.
//! - [`solver`]: zero counting, Newton refinement, Rouché localization.
//! - [`product`]: Möbius subvarieties of `H^n`, broadness, density search.
//! - [`special`]: quadratic points, reduced forms, Hilbert class polynomials.

pub mod error;
pub mod geometry;
pub mod group;
pub mod modular;
pub mod poly;
pub mod product;
pub mod solver;
pub mod special;

pub use error::{Error, ErrorKind, Result};
pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub type C64 = Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);
