//! Classical constant and elementary-function recipes, written out directly
//! so the references do not share code with the series machinery.

use crate::exact::BigRational;
use crate::float::BigFloat;

fn one(prec: usize) -> BigFloat {
    BigFloat::from_i64(1, prec)
}

/// `2^-prec` scaled to the magnitude of `x`: the loop cutoff for series.
fn negligible(term: &BigFloat, scale_exp: i32, prec: usize) -> bool {
    match term.exponent() {
        None => true,
        Some(e) => (e as i64) < scale_exp as i64 - prec as i64 - 4,
    }
}

/// `atan(1/m)` for an integer `m >= 2` by the Gregory series.
fn atan_inv(m: i64, prec: usize) -> BigFloat {
    let m2 = BigFloat::from_i64(m * m, prec);
    let mut power = &one(prec) / &BigFloat::from_i64(m, prec);
    let mut sum = power.clone();
    let mut k: i64 = 1;
    loop {
        power = &power / &m2;
        let term = &power / &BigFloat::from_i64(2 * k + 1, prec);
        if negligible(&term, 0, prec) {
            break;
        }
        sum = if k % 2 == 1 { &sum - &term } else { &sum + &term };
        k += 1;
    }
    sum
}

/// Machin: `pi = 16 atan(1/5) - 4 atan(1/239)`.
pub fn pi(prec: usize) -> BigFloat {
    let p = prec + 16;
    let v = &atan_inv(5, p).mul_pow2(4) - &atan_inv(239, p).mul_pow2(2);
    v.with_precision(prec)
}

/// Gauss-Legendre arithmetic-geometric mean iteration; shares nothing
/// with [`pi`] beyond square roots.
pub fn pi_agm(prec: usize) -> BigFloat {
    let p = prec + 16;
    let mut a = one(p);
    let mut b = &one(p) / &sqrt(&BigFloat::from_i64(2, p), p);
    let mut t = one(p).mul_pow2(-2);
    let mut k = 0;
    // digits double per step
    while (1usize << k) < p / 2 + 2 {
        let next = (&a + &b).mul_pow2(-1);
        b = sqrt(&(&a * &b), p);
        let d = &a - &next;
        t = &t - &(&d * &d).mul_pow2(k);
        a = next;
        k += 1;
    }
    let s = &a + &b;
    (&(&s * &s) / &t.mul_pow2(2)).with_precision(prec)
}

/// `atanh(y) = y + y^3/3 + ...` for `|y| < 1/2`.
fn atanh_small(y: &BigFloat, prec: usize) -> BigFloat {
    if y.is_zero() {
        return BigFloat::zero(prec);
    }
    let y2 = y * y;
    let mut power = y.clone();
    let mut sum = y.clone();
    let scale = y.exponent().unwrap_or(0);
    let mut k: i64 = 1;
    loop {
        power = &power * &y2;
        let term = &power / &BigFloat::from_i64(2 * k + 1, prec);
        if negligible(&term, scale, prec) {
            break;
        }
        sum = &sum + &term;
        k += 1;
    }
    sum
}

/// `ln 2 = 2 atanh(1/3)`.
pub fn ln2(prec: usize) -> BigFloat {
    let p = prec + 16;
    let third = &one(p) / &BigFloat::from_i64(3, p);
    atanh_small(&third, p).mul_pow2(1).with_precision(prec)
}

/// Natural logarithm of a positive value: `x = m 2^e` with `m` in `[1/2, 1)`,
/// then `ln m = 2 atanh((m-1)/(m+1))`.
pub fn ln(x: &BigFloat, prec: usize) -> BigFloat {
    assert!(!x.is_negative() && !x.is_zero(), "ln of a nonpositive value");
    let p = prec + 16;
    let x = x.with_precision(p);
    let e = x.exponent().expect("nonzero");
    let m = x.mul_pow2(-e);
    let y = &(&m - &one(p)) / &(&m + &one(p));
    let lm = atanh_small(&y, p).mul_pow2(1);
    let v = &lm + &(&ln2(p) * &BigFloat::from_i64(e as i64, p));
    v.with_precision(prec)
}

/// Newton iteration for `sqrt(x)`, `x >= 0`.
pub fn sqrt(x: &BigFloat, prec: usize) -> BigFloat {
    assert!(!x.is_negative(), "sqrt of a negative value");
    if x.is_zero() {
        return BigFloat::zero(prec);
    }
    let p = prec + 16;
    let x = x.with_precision(p);
    // seed from the f64 value of the mantissa, exponent halved separately
    let e = x.exponent().expect("nonzero");
    let e2 = e - e.rem_euclid(2);
    let m = x.mul_pow2(-e2);
    let mut r = BigFloat::from_f64(m.to_f64().sqrt(), p).mul_pow2(e2 / 2);
    let mut bits = 50usize;
    while bits < 2 * p {
        r = (&r + &(&x / &r)).mul_pow2(-1);
        bits *= 2;
    }
    r = (&r + &(&x / &r)).mul_pow2(-1);
    r.with_precision(prec)
}

/// Sqrt of an exact rational.
pub fn sqrt_rational(q: &BigRational, prec: usize) -> BigFloat {
    sqrt(&BigFloat::from_rational(q, prec + 16), prec)
}

/// Arctangent by reciprocal reduction, repeated argument halving
/// `atan x = 2 atan(x / (1 + sqrt(1 + x^2)))`, then the Gregory series.
pub fn atan(x: &BigFloat, prec: usize) -> BigFloat {
    let p = prec + 32;
    let x = x.with_precision(p);
    if x.is_zero() {
        return BigFloat::zero(prec);
    }
    let neg = x.is_negative();
    let mut y = x.abs();
    let big = y > one(p);
    if big {
        y = &one(p) / &y;
    }
    let mut doublings = 0;
    while y.exponent().unwrap_or(i32::MIN) > -8 {
        let r = sqrt(&(&one(p) + &(&y * &y)), p);
        y = &y / &(&one(p) + &r);
        doublings += 1;
    }
    // Gregory series for small y
    let y2 = &y * &y;
    let mut power = y.clone();
    let mut sum = y.clone();
    let scale = y.exponent().unwrap_or(0);
    let mut k: i64 = 1;
    loop {
        power = &power * &y2;
        let term = &power / &BigFloat::from_i64(2 * k + 1, p);
        if negligible(&term, scale, p) {
            break;
        }
        sum = if k % 2 == 1 { &sum - &term } else { &sum + &term };
        k += 1;
    }
    let mut v = sum.mul_pow2(doublings);
    if big {
        v = &pi(p).mul_pow2(-1) - &v;
    }
    if neg {
        v = -v;
    }
    v.with_precision(prec)
}

/// `asin x = atan(x / sqrt(1 - x^2))` for `|x| < 1`, and `±pi/2` at the ends.
pub fn asin(x: &BigFloat, prec: usize) -> BigFloat {
    let p = prec + 32;
    let x = x.with_precision(p);
    let c = &one(p) - &(&x * &x);
    if c.is_zero() {
        let h = pi(prec).mul_pow2(-1);
        return if x.is_negative() { -h } else { h };
    }
    assert!(!c.is_negative(), "asin argument outside [-1, 1]");
    atan(&(&x / &sqrt(&c, p)), prec)
}

/// Catalan's constant from `sum (-1)^k / (2k+1)^2` with the
/// Cohen-Villegas-Zagier alternating-series acceleration (error ~ 5.83^-n).
pub fn catalan(prec: usize) -> BigFloat {
    let p = prec + 32;
    let n = (p as f64 * std::f64::consts::LN_2 / 5.8284f64.ln()).ceil() as i64 + 4;
    let base = &BigFloat::from_i64(3, p) + &sqrt(&BigFloat::from_i64(8, p), p);
    let mut d = base.powi(n as u32);
    d = (&d + &(&one(p) / &d)).mul_pow2(-1);
    let mut b = BigFloat::from_i64(-1, p);
    let mut c = -d.clone();
    let mut s = BigFloat::zero(p);
    for k in 0..n {
        c = &b - &c;
        let a_k = &one(p) / &BigFloat::from_i64((2 * k + 1) * (2 * k + 1), p);
        s = &s + &(&c * &a_k);
        // b *= (k+n)(k-n) / ((k+1/2)(k+1)) = 2(k+n)(k-n) / ((2k+1)(k+1))
        b = &(&b * &BigFloat::from_i64(2 * (k + n) * (k - n), p)) / &BigFloat::from_i64((2 * k + 1) * (k + 1), p);
    }
    (&s / &d).with_precision(prec)
}
