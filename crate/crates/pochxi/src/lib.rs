//! Expansion of Xi-type entire functions in symmetrized Pochhammer
//! polynomials, with certified root classification of the polynomial
//! approximants, minimal beta-sequence continuation, and asymptotic
//! growth-law analysis.
//!
//! The library is organized around one pipeline:
//!
//! 1. [`afamily`] defines the admissible weight functions `A_I(x)` and the
//!    reference `Xi(t)` evaluator (closed forms or adaptive quadrature).
//! 2. [`coefficients`] computes the expansion coefficients `b_k(beta)`,
//!    their beta-derivatives, remainder terms and Laplace estimates.
//! 3. [`approximant`] assembles the degree-n truncation `Xi_n(t, beta)`
//!    both as a recursion-evaluable sum and as a dense polynomial in
//!    `u = t^2`.
//! 4. [`rootfinder`] certifies the real/complex root split of those
//!    polynomials (exact integer root isolation cross-checked against a
//!    working-precision simultaneous solver) and locates the onset of the
//!    all-real-roots regime in beta.
//! 5. [`betatrace`] follows the minimal beta-sequence `(n, beta_n, t_n)`
//!    with first-order increment predictions, Newton polishing of the
//!    double-root conditions, jump detection and checkpointing.
//! 6. [`asymptotics`] holds the growth-law toolbox: Lambert W, sublog,
//!    trace fitting, the transcendental u-equation and the reference
//!    asymptotic forms.
//!
//! All numerical work runs at a configurable binary precision (default
//! 256 bits) on MPFR floats; exact steps (Pochhammer coefficient tables,
//! root counting) use GMP rationals and integers.

pub mod afamily;
pub mod approximant;
pub mod asymptotics;
pub mod betatrace;
pub mod cli;
pub mod coefficients;
pub mod intpoly;
pub mod pochhammer;
pub mod quad;
pub mod real;
pub mod rootfinder;

pub use real::Ctx;

use thiserror::Error;

/// Library-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("root certification failed: {0}")]
    Certification(String),

    #[error("invalid bracket: {0}")]
    Bracket(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
