//! Beta-integral acceleration of hypergeometric series.
//!
//! The library derives rapidly converging series from "seed" integrals
//! `∫₀¹ x^a (1-x)^b / P(x) dx` by finding `z` and `Q(x)` with
//! `P(x) Q(x) = z - x^k (1-x)^s`, evaluates the resulting series to
//! arbitrary precision with tail bounds, and checks a catalog of
//! identities against independent high-precision references.
//!
//! Modules:
//! - [`exact`]: rationals, polynomials and polynomials with polynomial-in-`w` coefficients
//! - [`derivation`]: the seed solver and the weight polynomial `w(n)`
//! - [`float`]: arbitrary-precision binary floating point
//! - [`series`]: term recurrences, `TermExpr` and summation with tail bounds
//! - [`accel`]: the m-step grouping transform for `q+1Fq{1, x; y; z}`
//! - [`oracle`]: double-exponential quadrature and reference constants
//! - [`catalog`]: the identity registry, parsers, wire formats and verification driver

pub mod accel;
pub mod catalog;
pub mod derivation;
mod error;
pub mod exact;
pub mod float;
pub mod oracle;
pub mod series;

pub use error::{Error, Result};
