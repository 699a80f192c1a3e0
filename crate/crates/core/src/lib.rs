//! Linear stability of the radial optimizer of the two-dimensional spinorial
//! Caffarelli-Kohn-Nirenberg inequality.
//!
//! The linearized operator around the radial optimizer is a 2x2 matrix
//! Schrödinger operator on the line. After the substitution `z = tanh(rate*s)`
//! it becomes a block matrix in a Gegenbauer basis, whose truncations are
//! diagonalized here and cross-checked against closed-form region formulas and
//! a finite-difference discretization.
//!
//! Module map:
//! - [`params`]: admissible `(alpha, p)` and derived exponents
//! - [`radial`]: closed-form optimizer and Pöschl-Teller energies
//! - [`regions`]: closed-form symmetry / symmetry-breaking conditions
//! - [`gegenbauer`]: basis matrices and their quadrature oracle
//! - [`assembly`]: the truncated stability matrix
//! - [`spectral`]: eigensolvers, finite-difference oracle, eigenvector profiles
//! - [`sweep`]: sign maps, boundary bisection, convergence studies
//! - [`cli`]: the `sckn` command-line front end

pub mod assembly;
pub mod cli;
pub mod error;
pub mod gegenbauer;
pub mod params;
pub mod quad;
pub mod radial;
pub mod regions;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use params::ParameterPoint;
