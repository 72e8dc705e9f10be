//! N-extended Euler systems and the generalized Jacobi elliptic functions
//! they define.
//!
//! The system `ω_i' = α_i ∏_{j≠i} ω_j` with suitable coefficients and
//! initial conditions reproduces the circular functions (N = 2), the Jacobi
//! functions (N = 3), the biparametric Mahler functions `sng, cng, dng, fng`
//! (N = 4) and the triparametric family `Sng, .., Hng` (N = 5). Every closed
//! form in this crate can be checked against the quadratic first integrals
//! and against direct numerical integration.

pub mod ees;
pub mod elliptic;
pub mod error;
pub mod figures;
pub mod io;
pub mod mahler4;
pub mod mahler5;
pub mod ode;
pub mod quad;
pub mod rigidbody;
pub mod selftest;

pub use ees::{EesParams, FirstIntegralMatrix, Trajectory};
pub use error::{Error, Result};
pub use ode::{integrate, IntegratorConfig};
