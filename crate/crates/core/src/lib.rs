//! Truncated power-series solutions of (2+1)-dimensional ZK(n,n) equations
//!
//! ```text
//! u_t + a (u^n)_x + b (u^n)_xxx + k (u^n)_yyx = 0,   b, k > 0,
//! ```
//!
//! by the reduced differential transform method. The `t`-Taylor
//! coefficients `U_k(x, y)` are generated by an algebraic recursion that is
//! written once against [`FieldAlgebra`] and runs on two backends:
//!
//! * [`ExactBackend`]: closed forms in `sinh`/`cosh` of `μ (x + y)` with
//!   rational coefficients ([`HyperPoly`]);
//! * [`GridBackend`]: sampled fields with high-order centered finite
//!   differences, in `f64` or [`DoubleDouble`].
//!
//! [`verify`] holds the independent checks (brute-force nonlinear expansion,
//! series residuals, backend cross-validation, table reproduction) and
//! [`config`]/[`commands`] the batch front end used by the `rdtm` binary.
//!
//! The guide under `book/` walks through each piece; its code listings are
//! compiled as doctests of this crate.

pub mod algebra;
pub mod commands;
pub mod config;
mod error;
pub mod exact;
pub mod grid;
pub mod real;
pub mod series;
pub mod verify;

pub use algebra::{Axis, BackendKind, ExactBackend, FieldAlgebra, FieldNorm};
pub use error::{Error, Result};
pub use exact::{parse_rational, rat, HyperPoly, Monomial, Rational};
pub use grid::{field_from_function, stencil_coefficients, EvalMode, Grid, GridBackend, GridField, Stencil};
pub use real::{DoubleDouble, Real};
pub use series::{
    evaluate, nonlinear_coefficient, rdtm_step, series_power_coefficient, solve, solve_exact, transform_initial,
    InitialCondition, PdeSpec, SeriesSolution,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/exact-algebra.md")]
    mod exact_algebra {}
    #[doc = include_str!("../../../book/src/recursion.md")]
    mod recursion {}
    #[doc = include_str!("../../../book/src/grid-backend.md")]
    mod grid_backend {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
