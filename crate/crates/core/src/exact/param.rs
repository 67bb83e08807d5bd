use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{BigRational, Polynomial};
use crate::{Error, Result};

/// Polynomial in `x` whose coefficients are polynomials in a parameter `w`:
/// `coeffs[i]` is the `w`-polynomial multiplying `x^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ParamPolynomial {
    coeffs: Vec<Polynomial>,
}

impl ParamPolynomial {
    pub fn new(mut coeffs: Vec<Polynomial>) -> Self {
        while coeffs.last().is_some_and(Polynomial::is_zero) {
            coeffs.pop();
        }
        ParamPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        ParamPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::new(vec![Polynomial::one()])
    }

    /// A polynomial in `w` only (constant in `x`).
    pub fn from_w(p: Polynomial) -> Self {
        Self::new(vec![p])
    }

    /// Lifts a polynomial in `x` with constant coefficients.
    pub fn from_x(p: &Polynomial) -> Self {
        Self::new(p.coeffs().iter().cloned().map(Polynomial::constant).collect())
    }

    /// The parameter `w` itself.
    pub fn w() -> Self {
        Self::from_w(Polynomial::x())
    }

    /// Builds from integer coefficient tables `table[i][j]` = coefficient of `x^i w^j`.
    pub fn from_table(table: &[&[i64]]) -> Self {
        Self::new(table.iter().map(|row| Polynomial::from_i64(row)).collect())
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Polynomial {
        self.coeffs.get(i).cloned().unwrap_or_else(Polynomial::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in `x`; `None` for zero.
    pub fn degree_x(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Substitutes `w = w0`, giving an ordinary polynomial in `x`.
    pub fn specialize(&self, w0: &BigRational) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c.eval(w0)).collect())
    }

    /// Division in `(Q[w])[x]` by a divisor whose leading `x`-coefficient is
    /// a nonzero constant, so quotient and remainder stay polynomial in `w`.
    pub fn divmod(&self, divisor: &ParamPolynomial) -> Result<(ParamPolynomial, ParamPolynomial)> {
        let lead = divisor.coeffs.last().ok_or(Error::DivisionByZero)?;
        if !lead.is_constant() {
            return Err(Error::NonUnitLeading);
        }
        let inv = lead.coeff(0).recip();
        let dd = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((ParamPolynomial::zero(), self.clone()));
        }
        let mut quot = vec![Polynomial::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd].scale(&inv);
            if !c.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] = &rem[i + j] - &(&c * d);
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Ok((ParamPolynomial::new(quot), ParamPolynomial::new(rem)))
    }
}

impl Add for &ParamPolynomial {
    type Output = ParamPolynomial;
    fn add(self, rhs: &ParamPolynomial) -> ParamPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ParamPolynomial::new((0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect())
    }
}

impl Sub for &ParamPolynomial {
    type Output = ParamPolynomial;
    fn sub(self, rhs: &ParamPolynomial) -> ParamPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ParamPolynomial::new((0..n).map(|i| &self.coeff(i) - &rhs.coeff(i)).collect())
    }
}

impl Mul for &ParamPolynomial {
    type Output = ParamPolynomial;
    fn mul(self, rhs: &ParamPolynomial) -> ParamPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return ParamPolynomial::zero();
        }
        let mut out = vec![Polynomial::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        ParamPolynomial::new(out)
    }
}

impl Neg for &ParamPolynomial {
    type Output = ParamPolynomial;
    fn neg(self) -> ParamPolynomial {
        ParamPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for ParamPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            struct W<'a>(&'a Polynomial);
            impl fmt::Display for W<'_> {
                fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                    super::poly::write_poly(f, self.0.coeffs(), "w")
                }
            }
            match i {
                0 => write!(f, "({})", W(c))?,
                1 => write!(f, "({})x", W(c))?,
                _ => write!(f, "({})x^{i}", W(c))?,
            }
        }
        Ok(())
    }
}
