//! Arbitrary-precision binary floating point.
//!
//! [`BigFloat`] wraps `astro_float::BigFloat` with a fixed round-to-nearest
//! mode and value semantics. Binary operators round to the larger of the
//! two operand precisions. Transcendental helpers share a per-thread
//! constants cache.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{Consts, RoundingMode, Sign, Word};
use num_bigint::{BigInt, BigUint, Sign as IntSign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::exact::BigRational;

const RM: RoundingMode = RoundingMode::ToEven;

/// Smallest precision handed out, in bits.
pub const MIN_PRECISION: usize = 64;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Bits needed to carry `digits` decimal digits, never below [`MIN_PRECISION`].
pub fn bits_for_digits(digits: usize) -> usize {
    ((digits as f64 * LOG2_10).ceil() as usize + 8).max(MIN_PRECISION)
}

#[derive(Clone, Debug)]
pub struct BigFloat {
    inner: astro_float::BigFloat,
}

impl BigFloat {
    fn wrap(inner: astro_float::BigFloat) -> Self {
        debug_assert!(!inner.is_nan(), "NaN produced: {:?}", inner.err());
        BigFloat { inner }
    }

    pub fn zero(prec: usize) -> Self {
        Self::wrap(astro_float::BigFloat::new(prec.max(MIN_PRECISION)))
    }

    pub fn from_i64(v: i64, prec: usize) -> Self {
        Self::wrap(astro_float::BigFloat::from_i64(v, prec.max(MIN_PRECISION)))
    }

    pub fn from_f64(v: f64, prec: usize) -> Self {
        Self::wrap(astro_float::BigFloat::from_f64(v, prec.max(MIN_PRECISION)))
    }

    /// Exact conversion of an integer, then rounding to `prec` bits.
    pub fn from_bigint(v: &BigInt, prec: usize) -> Self {
        let prec = prec.max(MIN_PRECISION);
        if v.is_zero() {
            return Self::zero(prec);
        }
        let words: Vec<Word> = v.magnitude().to_u64_digits();
        let sign = if v.is_negative() { Sign::Neg } else { Sign::Pos };
        let e = (words.len() * 64) as i32;
        let mut f = astro_float::BigFloat::from_words(&words, sign, e);
        f.set_precision(prec, RM).expect("set precision");
        Self::wrap(f)
    }

    /// Correctly rounded (to within one division) value of `q`.
    pub fn from_rational(q: &BigRational, prec: usize) -> Self {
        let p = prec.max(MIN_PRECISION);
        if q.denom() == &BigInt::from(1) {
            return Self::from_bigint(q.numer(), p);
        }
        let n = Self::from_bigint(q.numer(), p + 64);
        let d = Self::from_bigint(q.denom(), p + 64);
        Self::wrap(n.inner.div(&d.inner, p, RM))
    }

    pub fn precision(&self) -> usize {
        self.inner.mantissa_max_bit_len().unwrap_or(MIN_PRECISION)
    }

    /// Rounds (or widens) to `prec` bits.
    pub fn with_precision(&self, prec: usize) -> Self {
        let mut f = self.inner.clone();
        f.set_precision(prec.max(MIN_PRECISION), RM).expect("set precision");
        Self::wrap(f)
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.inner.is_negative() && !self.is_zero()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.inner.abs())
    }

    fn p2(&self, other: &Self) -> usize {
        self.precision().max(other.precision())
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.inner.sqrt(self.precision(), RM))
    }

    pub fn exp(&self) -> Self {
        let p = self.precision();
        Self::wrap(with_consts(|cc| self.inner.exp(p, RM, cc)))
    }

    /// Natural logarithm; the argument must be positive.
    pub fn ln(&self) -> Self {
        let p = self.precision();
        Self::wrap(with_consts(|cc| self.inner.ln(p, RM, cc)))
    }

    pub fn powi(&self, n: u32) -> Self {
        let p = self.precision();
        let mut acc = Self::from_i64(1, p);
        let mut b = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        acc
    }

    /// `self * 2^k`, exact.
    pub fn mul_pow2(&self, k: i32) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut f = self.inner.clone();
        let e = f.exponent().expect("finite value");
        f.set_exponent(e + k);
        Self::wrap(f)
    }

    /// Binary exponent `e` with `|self| = m * 2^e`, `m` in `[1/2, 1)`.
    pub fn exponent(&self) -> Option<i32> {
        if self.is_zero() {
            None
        } else {
            self.inner.exponent()
        }
    }

    /// Nearest `f64` (saturating to 0 / infinity outside the `f64` range).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let e = self.inner.exponent().expect("finite value");
        let mut f = self.inner.clone();
        f.set_exponent(0);
        let mant = mantissa_f64(&f);
        let v = mant * 2f64.powi(e.clamp(-1100, 1100));
        if self.is_negative() {
            -v
        } else {
            v
        }
    }

    /// `log10 |self|`, accurate to about `1e-15` for any exponent; `-inf` for zero.
    pub fn log10_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let e = self.inner.exponent().expect("finite value");
        let mut f = self.inner.clone();
        f.set_exponent(0);
        mantissa_f64(&f).log10() + e as f64 * std::f64::consts::LOG10_2
    }

    /// Rounds `self * 10^digits` to the nearest integer.
    pub fn to_scaled_integer(&self, digits: usize) -> BigInt {
        let need = self.precision() + (digits as f64 * LOG2_10) as usize + 64;
        let scale = Self::from_bigint(&BigInt::from(10).pow(digits as u32), need);
        let v = &self.with_precision(need) * &scale;
        v.round_to_integer()
    }

    /// Nearest integer (ties to even at the binary level).
    pub fn round_to_integer(&self) -> BigInt {
        if self.is_zero() {
            return BigInt::zero();
        }
        let half = Self::from_f64(0.5, self.precision());
        let shifted = if self.is_negative() { self - &half } else { self + &half };
        let t = shifted.inner.int();
        let Some((words, _, sign, e, _)) = t.as_raw_parts() else {
            return BigInt::zero();
        };
        if e <= 0 {
            return BigInt::zero();
        }
        let mag = BigUint::from_slice(
            &words
                .iter()
                .flat_map(|w| [*w as u32, (*w >> 32) as u32])
                .collect::<Vec<_>>(),
        );
        let total_bits = (words.len() * 64) as i64;
        let shift = total_bits - e as i64;
        let mag = if shift >= 0 { mag >> (shift as usize) } else { mag << ((-shift) as usize) };
        let s = if sign == Sign::Neg { IntSign::Minus } else { IntSign::Plus };
        BigInt::from_biguint(s, mag)
    }

    /// Fixed-point decimal text with `digits` digits after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let n = self.to_scaled_integer(digits);
        let neg = n.is_negative();
        let mut s = n.magnitude().to_string();
        if s.len() <= digits {
            s = "0".repeat(digits + 1 - s.len()) + &s;
        }
        let (int, frac) = s.split_at(s.len() - digits);
        let body = if digits == 0 { int.to_string() } else { format!("{int}.{frac}") };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }

    /// Scientific notation with `sig` significant digits, e.g. `1.234e-31`.
    pub fn to_sci(&self, sig: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let sig = sig.max(1);
        let mut e10 = self.log10_abs().floor() as i64;
        let mut n;
        loop {
            let shift = sig as i64 - 1 - e10;
            let scaled = self.scale10(shift);
            n = scaled.round_to_integer();
            let len = n.magnitude().to_string().len();
            if len > sig {
                e10 += 1;
            } else if len < sig {
                e10 -= 1;
            } else {
                break;
            }
        }
        let digits = n.magnitude().to_string();
        let sign = if n.is_negative() { "-" } else { "" };
        let (head, tail) = digits.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{e10}")
        } else {
            format!("{sign}{head}.{tail}e{e10}")
        }
    }

    fn scale10(&self, k: i64) -> Self {
        let p = self.precision() + 64;
        let t = Self::from_bigint(&BigInt::from(10).pow(k.unsigned_abs() as u32), p);
        if k >= 0 {
            &self.with_precision(p) * &t
        } else {
            &self.with_precision(p) / &t
        }
    }

    /// Largest precision-independent decimal digit count this value carries.
    pub fn digits(&self) -> usize {
        (self.precision() as f64 / LOG2_10).floor() as usize
    }

}

fn mantissa_f64(f: &astro_float::BigFloat) -> f64 {
    // f in [1/2, 1): take the top 64 bits of the mantissa.
    let Some((words, _, _, _, _)) = f.as_raw_parts() else {
        return 0.0;
    };
    let top = *words.last().unwrap_or(&0);
    top as f64 / 2f64.powi(64)
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.inner.cmp(&other.inner) == Some(0)
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.inner.cmp(&other.inner).map(|c| c.cmp(&0))
    }
}

impl Add for &BigFloat {
    type Output = BigFloat;
    fn add(self, rhs: &BigFloat) -> BigFloat {
        BigFloat::wrap(self.inner.add(&rhs.inner, self.p2(rhs), RM))
    }
}

impl Sub for &BigFloat {
    type Output = BigFloat;
    fn sub(self, rhs: &BigFloat) -> BigFloat {
        BigFloat::wrap(self.inner.sub(&rhs.inner, self.p2(rhs), RM))
    }
}

impl Mul for &BigFloat {
    type Output = BigFloat;
    fn mul(self, rhs: &BigFloat) -> BigFloat {
        BigFloat::wrap(self.inner.mul(&rhs.inner, self.p2(rhs), RM))
    }
}

impl Div for &BigFloat {
    type Output = BigFloat;
    fn div(self, rhs: &BigFloat) -> BigFloat {
        BigFloat::wrap(self.inner.div(&rhs.inner, self.p2(rhs), RM))
    }
}

impl Neg for &BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat::wrap(-self.inner.clone())
    }
}

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: BigFloat) -> BigFloat {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: &BigFloat) -> BigFloat {
                (&self).$m(rhs)
            }
        }
        impl $tr<BigFloat> for &BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: BigFloat) -> BigFloat {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = f.precision().unwrap_or_else(|| self.digits().min(40));
        write!(f, "{}", self.to_sci(sig))
    }
}

/// Convenience for rounding a rational to a `f64` via [`BigFloat`].
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    BigFloat::from_rational(q, 64).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{parse_rational, ratio};

    #[test]
    fn integer_conversion_is_exact() {
        let big: BigInt = "123456789012345678901234567890123456789".parse().unwrap();
        let f = BigFloat::from_bigint(&big, 256);
        assert_eq!(f.round_to_integer(), big);
        assert_eq!(BigFloat::from_bigint(&-big.clone(), 256).round_to_integer(), -big);
        assert_eq!(BigFloat::from_i64(-7, 64).round_to_integer(), BigInt::from(-7));
    }

    #[test]
    fn rational_conversion() {
        let f = BigFloat::from_rational(&ratio(1, 3), 200);
        assert_eq!(f.to_decimal(30), "0.333333333333333333333333333333");
        let g = BigFloat::from_rational(&ratio(-22, 7), 200);
        assert_eq!(g.to_decimal(5), "-3.14286");
        assert_eq!(BigFloat::from_rational(&parse_rational("5/2").unwrap(), 64).round_to_integer(), BigInt::from(3));
    }

    #[test]
    fn decimal_and_scientific_text() {
        let x = BigFloat::from_rational(&ratio(-1, 8), 128);
        assert_eq!(x.to_decimal(3), "-0.125");
        assert_eq!(x.to_sci(3), "-1.25e-1");
        let tiny = BigFloat::from_rational(&ratio(3, 1), 128).mul_pow2(-200);
        assert!((tiny.log10_abs() - (3f64.log10() - 200.0 * 2f64.log10())).abs() < 1e-12);
        assert_eq!(BigFloat::from_i64(5572, 128).to_sci(2), "5.6e3");
        assert_eq!(BigFloat::from_i64(0, 128).to_decimal(2), "0.00");
    }

    #[test]
    fn elementary_functions() {
        let p = bits_for_digits(40);
        let two = BigFloat::from_i64(2, p);
        let r = two.sqrt();
        assert!(((&r * &r) - &two).abs().log10_abs() < -38.0);
        let l = two.ln().exp();
        assert!((&l - &two).abs().log10_abs() < -38.0);
        assert_eq!(BigFloat::from_i64(3, p).powi(5).round_to_integer(), BigInt::from(243));
        assert!((BigFloat::from_f64(0.1, 64).to_f64() - 0.1).abs() < 1e-17);
    }

    #[test]
    fn ordering() {
        let a = BigFloat::from_i64(-1, 64);
        let b = BigFloat::from_rational(&ratio(1, 3), 64);
        assert!(a < b);
        assert!(a.is_negative());
        assert!(!BigFloat::zero(64).is_negative());
    }
}
