//! Tanh-sinh quadrature on `[0, 1]` for integrands `x^a (1-x)^b g(x)`.
//!
//! With `x = 1/(1 + exp(-2u))`, `u = (pi/2) sinh t`, the endpoint factors
//! are handled in log form (`ln x = -ln(1+e)`, `ln(1-x) = -2u - ln(1+e)`
//! with `e = exp(-2u)`), so `x` and `1 - x` never lose relative accuracy
//! near the ends and algebraic singularities decay double-exponentially.

use num_traits::One;

use crate::derivation::{DerivedSeries, SeedIntegral};
use crate::exact::{format_rational, rat, BigRational, Polynomial};
use crate::float::{bits_for_digits, rational_to_f64, BigFloat};
use crate::{Error, Result};

use super::elementary;

/// Denominator of the integrand.
#[derive(Clone, Debug, PartialEq)]
pub enum Denominator {
    None,
    Poly(Polynomial),
    /// `z - x^k (1-x)^s`
    Kernel { z: BigRational, k: u32, s: u32 },
}

/// `∫_0^1 x^a (1-x)^b N(x) / D(x) dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureProblem {
    pub a: BigRational,
    pub b: BigRational,
    pub numerator: Polynomial,
    pub denominator: Denominator,
}

impl QuadratureProblem {
    pub fn new(a: BigRational, b: BigRational, numerator: Polynomial, denominator: Denominator) -> Result<Self> {
        if a <= rat(-1) || b <= rat(-1) {
            return Err(Error::InvalidParameter(format!(
                "exponents must exceed -1 (a = {}, b = {})",
                format_rational(&a),
                format_rational(&b)
            )));
        }
        let vanishes = match &denominator {
            Denominator::None => false,
            Denominator::Poly(p) => p.is_zero() || p.count_roots_in(&rat(0), &rat(1))? > 0,
            Denominator::Kernel { z, k, s } => {
                let kernel = crate::exact::expand_kernel(*k, *s)?;
                let d = &kernel + &Polynomial::constant(z.clone());
                d.is_zero() || d.count_roots_in(&rat(0), &rat(1))? > 0
            }
        };
        if vanishes {
            return Err(Error::InvalidParameter("denominator vanishes on [0, 1]".into()));
        }
        Ok(QuadratureProblem { a, b, numerator, denominator })
    }

    /// `B(p, q) = ∫ x^(p-1) (1-x)^(q-1) dx`.
    pub fn beta(p: &BigRational, q: &BigRational) -> Result<Self> {
        Self::new(p - rat(1), q - rat(1), Polynomial::one(), Denominator::None)
    }

    /// The seed form `∫ x^a (1-x)^b / P(x) dx`.
    pub fn seed(seed: &SeedIntegral) -> Result<Self> {
        Self::new(seed.a.clone(), seed.b.clone(), Polynomial::one(), Denominator::Poly(seed.p.clone()))
    }

    /// The transformed form `∫ Q(x) x^a (1-x)^b / (z - x^k (1-x)^s) dx`.
    pub fn transformed(ds: &DerivedSeries) -> Result<Self> {
        Self::new(
            ds.a.clone(),
            ds.b.clone(),
            ds.q.clone(),
            Denominator::Kernel { z: ds.z.clone(), k: ds.k, s: ds.s },
        )
    }

    fn rational_part(&self, x: &BigFloat, omx: &BigFloat, prec: usize) -> BigFloat {
        let horner = |p: &Polynomial| {
            let mut acc = BigFloat::zero(prec);
            for c in p.coeffs().iter().rev() {
                acc = &(&acc * x) + &BigFloat::from_rational(c, prec);
            }
            acc
        };
        let num = horner(&self.numerator);
        match &self.denominator {
            Denominator::None => num,
            Denominator::Poly(p) => &num / &horner(p),
            Denominator::Kernel { z, k, s } => {
                let ker = &x.powi(*k) * &omx.powi(*s);
                &num / &(&BigFloat::from_rational(z, prec) - &ker)
            }
        }
    }
}

/// Default cap on step halvings.
pub const MAX_LEVELS: u32 = 20;

/// Integrates to `target_digits` digits (absolute for values below 1,
/// relative above). Levels halve the step until two successive estimates
/// agree to `target_digits + 5`.
pub fn integrate(p: &QuadratureProblem, target_digits: usize) -> Result<BigFloat> {
    integrate_with_levels(p, target_digits, MAX_LEVELS)
}

pub fn integrate_with_levels(p: &QuadratureProblem, target_digits: usize, max_levels: u32) -> Result<BigFloat> {
    let digits = target_digits.max(1);
    let prec = bits_for_digits(digits + 20);
    let alpha = &p.a + BigRational::one();
    let beta = &p.b + BigRational::one();
    let alpha_f = BigFloat::from_rational(&alpha, prec);
    let beta_f = BigFloat::from_rational(&beta, prec);
    let ab = &alpha_f + &beta_f;
    let min_exp = rational_to_f64(&alpha).min(rational_to_f64(&beta));
    // node weights decay like exp(-2 min(alpha, beta) u)
    let u_max = (digits as f64 + 15.0) * std::f64::consts::LN_10 / (2.0 * min_exp) + 2.0;
    let t_max = (2.0 * u_max / std::f64::consts::PI).asinh();

    let pi = elementary::pi(prec);
    let half_pi = pi.mul_pow2(-1);
    let one = BigFloat::from_i64(1, prec);

    // contribution of the two nodes at +t and -t (only one when t = 0)
    let pair = |t: &BigFloat, centre: bool| -> BigFloat {
        let et = t.exp();
        let emt = &one / &et;
        let sinh = (&et - &emt).mul_pow2(-1);
        let cosh = (&et + &emt).mul_pow2(-1);
        let u = &half_pi * &sinh;
        let e = (-u.mul_pow2(1)).exp();
        let l = (&one + &e).ln();
        let ope = &one + &e;
        let big = &one / &ope; // the coordinate on the near-1 side
        let small = &e / &ope;
        let base = -(&ab * &l);
        let scale = &pi * &cosh;
        // t >= 0: x = big, 1-x = small
        let w_right = (&base - &(&beta_f * &u).mul_pow2(1)).exp();
        let mut total = &(&w_right * &p.rational_part(&big, &small, prec)) * &scale;
        if !centre {
            let w_left = (&base - &(&alpha_f * &u).mul_pow2(1)).exp();
            total = &total + &(&(&w_left * &p.rational_part(&small, &big, prec)) * &scale);
        }
        total
    };

    let mut h = BigFloat::from_i64(1, prec);
    let mut sum = pair(&BigFloat::zero(prec), true);
    for j in 1..=t_max.ceil() as i64 {
        sum = &sum + &pair(&BigFloat::from_i64(j, prec), false);
    }
    let mut estimate = &sum * &h;
    let mut last_diff = String::from("n/a");
    for level in 1..=max_levels {
        h = h.mul_pow2(-1);
        // only the odd multiples of the new step are new nodes
        let steps = (t_max / h.to_f64()).ceil() as i64;
        for j in (1..=steps).step_by(2) {
            sum = &sum + &pair(&(&BigFloat::from_i64(j, prec) * &h), false);
        }
        let next = &sum * &h;
        let diff = (&next - &estimate).abs();
        let scale = next.log10_abs().max(0.0);
        if diff.is_zero() || diff.log10_abs() < -((digits + 5) as f64) + scale {
            if level >= 2 {
                return Ok(next.with_precision(bits_for_digits(digits + 10)));
            }
        }
        last_diff = diff.to_sci(3);
        estimate = next;
    }
    Err(Error::QuadratureFailed { levels: max_levels, diff: last_diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn close(a: &BigFloat, b: &BigFloat, digits: i32) -> bool {
        (a - b).abs().log10_abs() < -(digits as f64)
    }

    #[test]
    fn beta_half_half_is_pi() {
        let v = integrate(&QuadratureProblem::beta(&ratio(1, 2), &ratio(1, 2)).unwrap(), 30).unwrap();
        assert!(close(&v, &elementary::pi(200), 30));
    }

    #[test]
    fn arcsine_seed() {
        // ∫ x^-1/2 / (1 + x/3) = pi sqrt(3) / 3
        let p = QuadratureProblem::new(
            ratio(-1, 2),
            rat(0),
            Polynomial::one(),
            Denominator::Poly(Polynomial::new(vec![rat(1), ratio(1, 3)])),
        )
        .unwrap();
        let v = integrate(&p, 30).unwrap();
        let prec = 200;
        let want = &(&elementary::pi(prec) * &elementary::sqrt(&BigFloat::from_i64(3, prec), prec))
            / &BigFloat::from_i64(3, prec);
        assert!(close(&v, &want, 30));
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(QuadratureProblem::beta(&rat(0), &rat(1)).is_err());
        let p = Denominator::Poly(Polynomial::from_i64(&[-1, 2]));
        assert!(QuadratureProblem::new(rat(0), rat(0), Polynomial::one(), p).is_err());
        let k = Denominator::Kernel { z: ratio(1, 8), k: 1, s: 1 };
        assert!(QuadratureProblem::new(rat(0), rat(0), Polynomial::one(), k).is_err());
    }

    #[test]
    fn level_cap_reports_failure() {
        let p = QuadratureProblem::beta(&ratio(1, 7), &ratio(1, 2)).unwrap();
        assert!(matches!(integrate_with_levels(&p, 60, 1), Err(Error::QuadratureFailed { .. })));
    }
}
