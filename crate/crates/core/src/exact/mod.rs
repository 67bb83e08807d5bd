//! Exact arithmetic: reduced big rationals, dense univariate polynomials
//! over the rationals, and polynomials in `x` whose coefficients are
//! polynomials in a parameter `w`.

mod param;
mod poly;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use param::ParamPolynomial;
pub use poly::{expand_kernel, Polynomial};

use crate::{Error, Result};
use num_traits::{One, Signed, Zero};

/// Builds a rational from an integer.
pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Builds the reduced rational `num/den`. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p"`, `"p/q"` or `"-p/q"` (whitespace around the parts is allowed).
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::BadRational(text.to_string());
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `base^exp` for a possibly negative exponent. Panics on `0^-k`.
pub fn rational_powi(base: &BigRational, exp: i64) -> BigRational {
    let mut acc = BigRational::one();
    let mut b = if exp < 0 { base.recip() } else { base.clone() };
    let mut e = exp.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    acc
}

/// Whether the rational is an integer `<= 0` (a pole of the Gamma function).
pub fn is_nonpositive_integer(q: &BigRational) -> bool {
    q.is_integer() && !q.is_positive()
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, j| acc * j)
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}
