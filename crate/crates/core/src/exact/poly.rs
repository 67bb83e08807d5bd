use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::{binomial, BigRational};
use crate::{Error, Result};

/// Dense univariate polynomial over the rationals; `coeffs[i]` multiplies `x^i`.
///
/// The coefficient vector never ends in a zero, so the zero polynomial has
/// no coefficients and every other polynomial has a nonzero leading term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(BigRational::one(), 1)
    }

    pub fn monomial(c: BigRational, degree: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| super::rat(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer((i as i64).into()))
                .collect(),
        )
    }

    /// Euclidean division: `self = divisor * q + r` with `deg r < deg divisor`.
    pub fn divmod(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        let lead = divisor.leading().ok_or(Error::DivisionByZero)?;
        let dd = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Polynomial::zero(), self.clone()));
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / lead;
            if !c.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * d;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Ok((Polynomial::new(quot), Polynomial::new(rem)))
    }

    /// Number of distinct real roots in the closed interval `[lo, hi]`,
    /// counted exactly with a Sturm sequence.
    pub fn count_roots_in(&self, lo: &BigRational, hi: &BigRational) -> Result<usize> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_constant() {
            return Ok(0);
        }
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            let (_, r) = seq[n - 2].divmod(&seq[n - 1])?;
            if r.is_zero() {
                break;
            }
            seq.push(-r);
        }
        let sign_changes = |x: &BigRational| {
            let mut changes = 0;
            let mut prev = 0i8;
            for p in &seq {
                let v = p.eval(x);
                let s = if v.is_zero() {
                    continue;
                } else if v.is_positive() {
                    1
                } else {
                    -1
                };
                if prev != 0 && s != prev {
                    changes += 1;
                }
                prev = s;
            }
            changes
        };
        // Sturm counts roots in (lo, hi]; add lo itself when it is a root.
        let interior = sign_changes(lo) - sign_changes(hi);
        let at_lo = usize::from(self.eval(lo).is_zero());
        Ok(interior + at_lo)
    }
}

/// `-x^k (1-x)^s`, the z-independent part of `z - x^k (1-x)^s`.
pub fn expand_kernel(k: u32, s: u32) -> Result<Polynomial> {
    if k == 0 && s == 0 {
        return Err(Error::ConstantKernel);
    }
    let mut coeffs = vec![BigRational::zero(); (k + s + 1) as usize];
    for j in 0..=s {
        let c = BigRational::from_integer(binomial(s as u64, j as u64));
        // -(-1)^j C(s, j) x^(k+j)
        coeffs[(k + j) as usize] = if j % 2 == 0 { -c } else { c };
    }
    Ok(Polynomial::new(coeffs))
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -self.clone()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Writes in descending powers, e.g. `-3x^2 + 15x - 48`, using variable `x`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, &self.coeffs, "x")
    }
}

pub(super) fn write_poly(f: &mut fmt::Formatter<'_>, coeffs: &[BigRational], var: &str) -> fmt::Result {
    if coeffs.is_empty() {
        return write!(f, "0");
    }
    let mut first = true;
    for (i, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if first {
            if c.is_negative() {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
        }
        first = false;
        let mag_text = super::format_rational(&mag);
        let mag_text = if mag.is_integer() { mag_text } else { format!("({mag_text})") };
        match (i, mag.is_one()) {
            (0, _) => write!(f, "{mag_text}")?,
            (1, true) => write!(f, "{var}")?,
            (1, false) => write!(f, "{mag_text}{var}")?,
            (_, true) => write!(f, "{var}^{i}")?,
            (_, false) => write!(f, "{mag_text}{var}^{i}")?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio};

    #[test]
    fn kummer_seed_division() {
        // x^2 - x - 2 = (x + 1)(x - 2)
        let p = Polynomial::from_i64(&[-2, -1, 1]);
        let (q, r) = p.divmod(&Polynomial::from_i64(&[1, 1])).unwrap();
        assert_eq!(q, Polynomial::from_i64(&[-2, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn unit_divisor() {
        let p = Polynomial::new(vec![ratio(1, 3), rat(0), rat(-7)]);
        let (q, r) = p.divmod(&Polynomial::one()).unwrap();
        assert_eq!(q, p);
        assert!(r.is_zero());
    }

    #[test]
    fn zero_divisor_is_an_error() {
        let p = Polynomial::from_i64(&[1, 2]);
        assert_eq!(p.divmod(&Polynomial::zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn cubic_over_linear_round_trip() {
        let d = Polynomial::new(vec![rat(1), ratio(1, 3)]);
        for c in [ratio(-48, 1), ratio(7, 11), ratio(-1, 1000)] {
            let p = Polynomial::new(vec![c, rat(-1), rat(2), rat(-1)]);
            let (q, r) = p.divmod(&d).unwrap();
            assert_eq!(&(&d * &q) + &r, p);
            assert!(r.degree().unwrap_or(0) < 1);
        }
    }

    #[test]
    fn kernel_expansions() {
        assert_eq!(expand_kernel(1, 2).unwrap(), Polynomial::from_i64(&[0, -1, 2, -1]));
        assert_eq!(expand_kernel(1, 0).unwrap(), Polynomial::from_i64(&[0, -1]));
        assert_eq!(
            expand_kernel(2, 4).unwrap(),
            Polynomial::from_i64(&[0, 0, -1, 4, -6, 4, -1])
        );
        assert_eq!(expand_kernel(0, 0), Err(Error::ConstantKernel));
    }

    #[test]
    fn kernel_matches_direct_product() {
        // binomial expansion vs repeated multiplication
        let one_minus_x = Polynomial::from_i64(&[1, -1]);
        for k in 0..5u32 {
            for s in 0..5u32 {
                if k + s == 0 {
                    continue;
                }
                let direct = -(&Polynomial::x().pow(k) * &one_minus_x.pow(s));
                assert_eq!(expand_kernel(k, s).unwrap(), direct, "k={k} s={s}");
            }
        }
    }

    #[test]
    fn sturm_counts() {
        let x = |n| Polynomial::from_i64(n);
        let (lo, hi) = (rat(0), rat(1));
        assert_eq!(x(&[1, 1]).count_roots_in(&lo, &hi).unwrap(), 0);
        // (x - 1/2)^2 touches zero without a sign change
        let sq = Polynomial::new(vec![ratio(1, 4), rat(-1), rat(1)]);
        assert_eq!(sq.count_roots_in(&lo, &hi).unwrap(), 1);
        // w - x(1 - x) at w = 1/4 has the double root 1/2, at w = 1 none
        assert_eq!(x(&[1, -1, 1]).count_roots_in(&lo, &hi).unwrap(), 0);
        // roots at both endpoints
        assert_eq!(x(&[0, 1, -1]).count_roots_in(&lo, &hi).unwrap(), 2);
        assert_eq!(x(&[-2, 1]).count_roots_in(&lo, &hi).unwrap(), 0);
    }

    #[test]
    fn display() {
        let q = Polynomial::from_i64(&[-48, 15, -3]);
        assert_eq!(q.to_string(), "-3x^2 + 15x - 48");
        assert_eq!(Polynomial::new(vec![rat(1), ratio(1, 3)]).to_string(), "(1/3)x + 1");
        assert_eq!(Polynomial::zero().to_string(), "0");
    }
}
