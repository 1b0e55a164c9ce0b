//! Numerical laboratory for mean counting functions of Dirichlet series.
//!
//! The crate is `no_std` (with `alloc`). Every quantity is computed from a
//! finite [`DirichletPolynomial`]; symbols of composition operators are
//! wrapped in a validated [`SymbolG0`].
//!
//! Module map:
//! - [`series`], [`symbol`], [`primes`]: polynomials, the Bohr lift and symbol validation.
//! - [`zeros`]: argument-principle zero finder.
//! - [`counting`]: finite-height counting sums and the mean counting function.
//! - [`jessen`]: Jessen functions by time average and by torus integration.
//! - [`compop`]: norms of composition operators and integral identities.
//! - [`oracles`]: closed-form reference cases.
#![no_std]
// Float methods become inherent whenever std is linked into the build graph.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod compop;
pub mod counting;
pub mod error;
pub mod jessen;
pub mod oracles;
pub mod polyroots;
pub mod primes;
pub mod quad;
pub mod series;
pub mod symbol;
pub mod zeros;
pub mod zeta;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use quad::QuadratureSpec;
pub use series::{BohrForm, DirichletPolynomial, FiniteCharacter};
pub use symbol::{validate_symbol, SymbolG0, ValidationCertificate};
